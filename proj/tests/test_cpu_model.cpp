#include <doctest.h>

#include <random>

#include "chainsim/cpu_model.hpp"

using namespace chainsim;

namespace {

ThreadPrototype t111() {
  ThreadPrototype t;
  t.instructions = 1'400'000'000;
  t.cpi = 0.7432;
  t.mem_accesses = 310'000'000;
  t.cache_refs = 1'000'000;
  t.cache_misses_ref = 100'000;
  t.cache_miss_penalty = 4.0;
  return t;
}

struct LBFixture {
  std::vector<LiveThread> threads;
  HostRuntime host;

  explicit LBFixture(int cores) {
    host.host = 0;
    host.clock_hz = 1e9;
    host.queues.resize(cores);
    host.sched = SchedTopology::for_cores(cores);
  }

  int add_thread(int core, double share = 1024.0) {
    LiveThread t;
    t.id = static_cast<int>(threads.size());
    t.host = 0;
    t.runqueue = core;
    t.phase = ThreadPhase::Cpu;
    t.share = share;
    threads.push_back(t);
    host.queues[core].threads.push_back(t.id);
    return t.id;
  }

  std::vector<int> queue_sizes() const {
    std::vector<int> out;
    for (const auto& q : host.queues) out.push_back(static_cast<int>(q.threads.size()));
    return out;
  }
};

}  // namespace

TEST_CASE("compute_share divides the service shares over live threads") {
  CHECK(compute_share(1024.0, 1) == 1024.0);
  CHECK(compute_share(1024.0, 2) == 512.0);
  // 2000 millicores requested -> 2048 cgroups shares, halved over two threads
  ResourceAllocScenario rs;
  rs.cpu_requests_mc = 2000.0;
  CHECK(compute_share(rs.cpu_share(), 2) == 1024.0);
}

TEST_CASE("compute_share_ratio") {
  SUBCASE("sole Best Effort occupant holds the full core") {
    CHECK(compute_share_ratio(1024.0, 1024.0, false) == 1024.0);
  }
  SUBCASE("equal Best Effort threads split the core") {
    CHECK(compute_share_ratio(512.0, 1024.0, false) == 512.0);
  }
  SUBCASE("Guaranteed shares above one core are clamped") {
    CHECK(compute_share_ratio(2048.0, 2048.0, true, 4096.0) == 1024.0);
  }
  SUBCASE("Guaranteed shares below a core are kept") {
    CHECK(compute_share_ratio(512.0, 4096.0, true, 512.0) == 512.0);
  }
}

TEST_CASE("cache_miss_rate") {
  ThreadPrototype t = t111();
  SUBCASE("zero coefficients leave the reference rate") {
    CHECK(cache_miss_rate(t, std::nullopt, 1, 3.1e8) == doctest::Approx(0.1));
  }
  SUBCASE("corrections multiply: 0.1 * 1.2 * 1.1 = 0.132") {
    t.cmc_b = 0.1;  // constant CMC term
    t.cmt_b = 0.2;  // constant CMT term
    CHECK(cache_miss_rate(t, 1000.0, 1, 3.1e8) == doctest::Approx(0.132));
  }
  SUBCASE("unlimited CPU forces the CMC term to zero") {
    t.cmc_a = 5.0;
    t.cmc_b = 3.0;
    CHECK(cache_miss_rate(t, std::nullopt, 1, 3.1e8) == doctest::Approx(0.1));
  }
  SUBCASE("log terms react to the runqueue access volume") {
    t.cmt_a = 0.01;
    const double lone = cache_miss_rate(t, std::nullopt, 1, 1e6);
    const double crowded = cache_miss_rate(t, std::nullopt, 1, 1e9);
    CHECK(crowded > lone);
  }
}

TEST_CASE("isolated_cpu_time matches the hand-derived value") {
  const ThreadPrototype t = t111();
  // 1.4e9 * (0.7432 + (3.1e8/1.4e9) * 0.1 * 4) / 1.59e9
  CHECK(isolated_cpu_time_seconds(t, 1.59e9) ==
        doctest::Approx(0.732377358490566).epsilon(1e-12));
  CHECK(isolated_cpu_time(t, 1.59e9) == 732'377'359);  // ceil to whole ns

  SUBCASE("zero instructions take zero time") {
    ThreadPrototype z = t;
    z.instructions = 0;
    CHECK(isolated_cpu_time(z, 1.59e9) == 0);
  }
  SUBCASE("doubling the clock halves the time exactly") {
    CHECK(isolated_cpu_time_seconds(t, 2.0e9) == isolated_cpu_time_seconds(t, 1.0e9) / 2.0);
  }
}

TEST_CASE("effective_cpu_time") {
  ThreadPrototype plain;
  plain.instructions = 1'000'000;
  plain.cpi = 1.25;
  const double clock = 1e9;

  SUBCASE("full share and no penalty reduce to inst * cpi / clock") {
    const Ns t = effective_cpu_time(1e6, plain, clock, 1024.0, 0.0);
    CHECK(t == ceil_duration_ns(1e6 * 1.25 / clock));
  }
  SUBCASE("halving the ratio doubles the time") {
    const Ns full = effective_cpu_time(1e6, plain, clock, 1024.0, 0.0);
    const Ns half = effective_cpu_time(1e6, plain, clock, 512.0, 0.0);
    CHECK(half == 2 * full);
  }
  SUBCASE("cycle penalty equal to the cpi doubles the time") {
    ThreadPrototype t;
    t.instructions = 1'000'000;
    t.cpi = 1.0;
    t.mem_accesses = 1'000'000;       // one access per instruction
    t.cache_refs = 2;
    t.cache_misses_ref = 1;           // miss rate 0.5
    t.cache_miss_penalty = 2.0;       // penalty = 1 * 0.5 * 2 = 1 = cpi
    const double mr = cache_miss_rate(t, std::nullopt, 1, 0.0);
    CHECK(cycle_penalty(t, mr) == doctest::Approx(t.cpi));
    const Ns with_penalty = effective_cpu_time(1e6, t, clock, 1024.0, mr);
    const Ns without = effective_cpu_time(1e6, t, clock, 1024.0, 0.0);
    CHECK(with_penalty == 2 * without);
  }
  SUBCASE("monotonicity: more share ratio never increases the time") {
    std::mt19937 rng(3);
    for (int i = 0; i < 200; ++i) {
      ThreadPrototype t;
      t.instructions = 1 + static_cast<std::int64_t>(rng() % 1'000'000'000);
      t.cpi = 0.3 + static_cast<double>(rng() % 100) / 50.0;
      t.mem_accesses = static_cast<std::int64_t>(rng() % t.instructions);
      t.cache_refs = 1000;
      t.cache_misses_ref = rng() % 1000;
      t.cache_miss_penalty = static_cast<double>(rng() % 10);
      const double mr = cache_miss_rate(t, std::nullopt, 1, 1e8);
      double r1 = 1.0 + static_cast<double>(rng() % 1024);
      double r2 = 1.0 + static_cast<double>(rng() % 1024);
      if (r1 > r2) std::swap(r1, r2);
      CHECK(effective_cpu_time(1e8, t, 1.59e9, r2, mr) <=
            effective_cpu_time(1e8, t, 1.59e9, r1, mr));
    }
  }
}

TEST_CASE("consume_instructions") {
  ThreadPrototype plain;
  plain.instructions = 1'000'000;
  plain.cpi = 1.0;
  const double rate = instruction_rate(plain, 1e9, 1024.0, 0.0);

  SUBCASE("zero interval changes nothing") {
    CHECK(consume_instructions(5e5, rate, 0) == 5e5);
  }
  SUBCASE("the effective time consumes everything exactly") {
    const Ns eta = effective_cpu_time(1e6, plain, 1e9, 1024.0, 0.0);
    CHECK(consume_instructions(1e6, rate, eta) == 0.0);
  }
  SUBCASE("half the time consumes half the instructions") {
    // 1e6 instructions at cpi 1.0 on 1 GHz: exactly 1 ms, halves cleanly
    CHECK(consume_instructions(1e6, rate, 500'000) == doctest::Approx(5e5));
  }
}

TEST_CASE("load_balance: two threads on two idle cores end up one per core") {
  LBFixture f(2);
  f.add_thread(0);
  f.add_thread(0);
  load_balance(f.host, f.threads);
  CHECK(f.queue_sizes() == std::vector<int>{1, 1});
}

TEST_CASE("load_balance: four equal threads spread over four cores") {
  LBFixture f(4);
  for (int i = 0; i < 4; ++i) f.add_thread(0);
  load_balance(f.host, f.threads);
  CHECK(f.queue_sizes() == std::vector<int>{1, 1, 1, 1});

  // aggregate load is equal across the two pair groups
  detail::refresh_loads(f.host, f.threads);
  const double pair0 = detail::queue_load(f.host, f.threads, 0) +
                       detail::queue_load(f.host, f.threads, 1);
  const double pair1 = detail::queue_load(f.host, f.threads, 2) +
                       detail::queue_load(f.host, f.threads, 3);
  CHECK(pair0 == doctest::Approx(pair1));
}

TEST_CASE("load_balance: three equal threads on two cores settle at 2/1") {
  LBFixture f(2);
  for (int i = 0; i < 3; ++i) f.add_thread(0);
  load_balance(f.host, f.threads);
  auto sizes = f.queue_sizes();
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<int>{1, 2});

  // a second pass is a fixed point: re-balancing recreates no migration
  const auto before = f.queue_sizes();
  load_balance(f.host, f.threads);
  CHECK(f.queue_sizes() == before);
}

TEST_CASE("load_balance: work conservation and partition on random fixtures") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 400; ++trial) {
    const int cores = 1 + static_cast<int>(rng() % 6);
    LBFixture f(cores);
    const int n = static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i) {
      const double share = (rng() % 2) ? 1024.0 : 256.0 + static_cast<double>(rng() % 2048);
      f.add_thread(static_cast<int>(rng() % cores), share);
    }
    load_balance(f.host, f.threads);

    // partition: every thread sits on exactly one runqueue
    std::vector<int> seen(f.threads.size(), 0);
    for (int c = 0; c < cores; ++c)
      for (int tid : f.host.queues[c].threads) {
        seen[tid]++;
        CHECK(f.threads[tid].runqueue == c);
      }
    for (int s : seen) CHECK(s == 1);

    // work conservation: no idle core while any queue holds two runnable threads
    const auto sizes = f.queue_sizes();
    const bool any_idle = std::any_of(sizes.begin(), sizes.end(), [](int s) { return s == 0; });
    const bool any_crowded =
        std::any_of(sizes.begin(), sizes.end(), [](int s) { return s >= 2; });
    CHECK_FALSE((any_idle && any_crowded));
  }
}
