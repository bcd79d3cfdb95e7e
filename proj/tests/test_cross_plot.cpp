#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "cpte/cross_plot.hpp"
#include "cpte/synth.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cpte;
using testing::error_code;

namespace {

// Plain reading of the partition: theta = atan2(y, x) cut every dtheta
// degrees, rings of width r_max / R. Used where dtheta divides 90.
std::vector<std::pair<int, int>> naive_states(const std::vector<double>& xs, const std::vector<double>& ys,
                                              double dtheta, int rings) {
  const double mx = *std::min_element(xs.begin(), xs.end());
  const double my = *std::min_element(ys.begin(), ys.end());
  std::vector<double> r(xs.size()), th(xs.size());
  double r_max = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i] - mx, y = ys[i] - my;
    r[i] = std::hypot(x, y);
    th[i] = std::atan2(y, x) * 180.0 / std::numbers::pi;
    r_max = std::max(r_max, r[i]);
  }
  const int sectors = static_cast<int>(std::ceil(90.0 / dtheta));
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (r[i] == 0.0) {
      out.emplace_back(0, 0);
      continue;
    }
    const int ring = std::min(static_cast<int>(r[i] / r_max * rings), rings - 1);
    const int sector = std::min(static_cast<int>(th[i] / dtheta), sectors - 1);
    out.emplace_back(ring, sector);
  }
  return out;
}

// -sum p log2 p over consecutive state pairs, counted with a map.
double naive_entropy(const std::vector<std::pair<int, int>>& states) {
  std::map<std::pair<std::pair<int, int>, std::pair<int, int>>, int> counts;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) counts[{states[i], states[i + 1]}]++;
  const double total = static_cast<double>(states.size() - 1);
  double h = 0.0;
  for (const auto& [pair, c] : counts) {
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

Epoch random_epoch(std::size_t n_ch, std::size_t len, std::uint64_t seed) {
  Epoch e;
  e.n_channels = n_ch;
  e.window_length = len;
  Rng rng(seed);
  e.samples.resize(n_ch * len);
  for (double& v : e.samples) v = rng.normal();
  return e;
}

}  // namespace

TEST_CASE("partition config") {
  PartitionConfig cfg;
  CHECK(cfg.sector_count() == 9);
  cfg.angular_ruler_deg = 18;
  CHECK(cfg.sector_count() == 5);
  cfg.angular_ruler_deg = 25;
  CHECK(cfg.sector_count() == 4);
  cfg.angular_ruler_deg = 0;
  CHECK(error_code([&] { cfg.validate(); }) != "");
  cfg.angular_ruler_deg = 91;
  CHECK(error_code([&] { cfg.validate(); }) != "");
  PartitionConfig rings;
  rings.radial_rings = 0;
  CHECK(error_code([&] { rings.validate(); }) != "");
}

TEST_CASE("constant series sit at the origin") {
  const std::vector<double> c(50, 3.25);
  for (const CrossPlotState& s : encode_states(c, c, {})) {
    CHECK(s.ring == 0);
    CHECK(s.sector == 0);
  }
  CHECK(cpte::cpte(c, c) == 0.0);
}

TEST_CASE("hand-enumerable alternating example") {
  const std::vector<double> x = {0, 1, 0, 1};
  const auto states = encode_states(x, x, {});
  REQUIRE(states.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(states[i].ring == (i % 2 ? 4 : 0));
    CHECK(states[i].sector == (i % 2 ? 4 : 0));
  }
  const double expected = -(2.0 / 3.0) * std::log2(2.0 / 3.0) - (1.0 / 3.0) * std::log2(1.0 / 3.0);
  CHECK(cpte::cpte(x, x) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(std::abs(cpte::cpte(x, x) - 0.9183) <= 1e-4);
}

TEST_CASE("encode_states errors") {
  const std::vector<double> a(3, 0.0), b(4, 0.0), one(1, 0.0);
  CHECK(error_code([&] { encode_states(a, b, {}); }) == "length_mismatch");
  CHECK(error_code([&] { encode_states(one, one, {}); }) == "too_short");
  std::vector<double> bad = {0.0, std::numeric_limits<double>::quiet_NaN(), 1.0};
  CHECK(error_code([&] { encode_states(bad, a, {}); }) == "non_finite");
}

TEST_CASE("sector folding for a ruler that does not divide 90 degrees") {
  PartitionConfig cfg;
  cfg.angular_ruler_deg = 25;  // 4 sectors: [0,25) [25,45] (45,65] (65,90]
  auto sector_at = [&](double deg) {
    const double rad = deg * std::numbers::pi / 180.0;
    const std::vector<double> x = {0, std::cos(rad)}, y = {0, std::sin(rad)};
    return encode_states(x, y, cfg)[1].sector;
  };
  CHECK(sector_at(10) == 0);
  CHECK(sector_at(30) == 1);
  CHECK(sector_at(44) == 1);
  CHECK(sector_at(46) == 2);
  CHECK(sector_at(80) == 3);
  CHECK(sector_at(90) == 3);
  CHECK(sector_at(0) == 0);
}

TEST_CASE("absolute radial mode") {
  PartitionConfig cfg;
  cfg.radial_mode = RadialMode::Absolute;
  cfg.radial_ruler = 10;
  const std::vector<double> x = {0, 25, 9.99, 30}, y = {0, 0, 0, 0};
  const auto s = encode_states(x, y, cfg);
  CHECK(s[0].ring == 0);
  CHECK(s[1].ring == 2);
  CHECK(s[2].ring == 0);
  CHECK(s[3].ring == 2);  // r = r_max = 30 closes the last of ceil(30/10) rings
}

TEST_CASE("states agree with the plain angle/radius partition") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.index(400);
    const auto x = testing::uniform_series(rng, n, 5.0);
    const auto y = testing::uniform_series(rng, n, 2.0);
    for (double dtheta : {10.0, 18.0, 30.0, 45.0, 90.0}) {
      PartitionConfig cfg;
      cfg.angular_ruler_deg = dtheta;
      const auto naive = naive_states(x, y, dtheta, cfg.radial_rings);
      const auto states = encode_states(x, y, cfg);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(states[i].ring == naive[i].first);
        CHECK(states[i].sector == naive[i].second);
      }
      CHECK(cpte::cpte(x, y, cfg) == doctest::Approx(naive_entropy(naive)).epsilon(1e-12));
    }
  }
}

TEST_CASE("transition distribution") {
  const CrossPlotState a{0, 0}, b{1, 2};
  SUBCASE("A,B,A,B") {
    const std::vector<CrossPlotState> s = {a, b, a, b};
    const auto d = transition_distribution(s);
    CHECK(d.transitions == 3);
    REQUIRE(d.entries.size() == 2);
    for (const Transition& t : d.entries) {
      if (t.from == a) CHECK(t.probability == doctest::Approx(2.0 / 3.0));
      else CHECK(t.probability == doctest::Approx(1.0 / 3.0));
    }
  }
  SUBCASE("two elements") {
    const std::vector<CrossPlotState> s = {a, b};
    const auto d = transition_distribution(s);
    REQUIRE(d.entries.size() == 1);
    CHECK(d.entries[0].probability == 1.0);
  }
  SUBCASE("constant") {
    const std::vector<CrossPlotState> s(40, b);
    const auto d = transition_distribution(s);
    REQUIRE(d.entries.size() == 1);
    CHECK(d.entries[0].count == 39);
    CHECK(entropy_bits(d) == 0.0);
  }
  SUBCASE("too short") {
    const std::vector<CrossPlotState> s = {a};
    CHECK(error_code([&] { transition_distribution(s); }) == "too_short");
  }
  SUBCASE("random sequences") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<CrossPlotState> s(2 + rng.index(200));
      for (auto& st : s) st = {static_cast<int>(rng.index(3)), static_cast<int>(rng.index(4))};
      const auto d = transition_distribution(s);
      double sum = 0.0;
      for (const Transition& t : d.entries) {
        CHECK(t.probability > 0.0);
        sum += t.probability;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
      CHECK(d.entries.size() <= s.size() - 1);
      CHECK(std::is_sorted(d.entries.begin(), d.entries.end(), [](const Transition& l, const Transition& r) {
        return std::tie(l.from, l.to) < std::tie(r.from, r.to);
      }));
    }
  }
}

TEST_CASE("symmetry is exact") {
  Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(2000);
    const auto x = testing::uniform_series(rng, n, 10.0);
    const auto y = testing::uniform_series(rng, n, 3.0);
    for (double dtheta : {10.0, 7.0, 25.0}) {
      PartitionConfig cfg;
      cfg.angular_ruler_deg = dtheta;
      CHECK(cpte::cpte(x, y, cfg) == cpte::cpte(y, x, cfg));
    }
  }
}

TEST_CASE("translation and scale invariance are exact") {
  Rng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(2000);
    const auto x = testing::uniform_series(rng, n);
    const auto y = testing::uniform_series(rng, n);
    std::vector<double> xs = x, ys = y, xc = x, yc = y, xd = x, yd = y;
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] += 12.5;
      ys[i] -= 7.25;
      xc[i] *= 4.0;
      yc[i] *= 4.0;
      xd[i] *= 3.7;
      yd[i] *= 3.7;
    }
    const double base = cpte::cpte(x, y);
    CHECK(cpte::cpte(xs, ys) == base);
    CHECK(cpte::cpte(xc, yc) == base);
    CHECK(cpte::cpte(xd, yd) == base);
  }
}

TEST_CASE("entropy bounds") {
  Rng rng(35);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.index(500);
    const auto x = testing::uniform_series(rng, n);
    const auto y = testing::uniform_series(rng, n);
    const double h = cpte::cpte(x, y);
    CHECK(h >= 0.0);
    CHECK(h <= std::log2(static_cast<double>(n - 1)) + 1e-12);
    const auto d = transition_distribution(encode_states(x, y, {}));
    CHECK((h == 0.0) == (d.entries.size() == 1));
  }
}

TEST_CASE("mean CPTE falls as common-drive coupling rises") {
  double previous = std::numeric_limits<double>::infinity();
  for (double c : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    double sum = 0.0;
    // The c = 0 to 0.25 step is about 0.06 bits against a per-pair spread
    // of about 0.2, so 200 pairs keep the ordering clear of sampling noise.
    for (std::uint64_t t = 0; t < 200; ++t) {
      CouplingSpec spec;
      spec.coupling = c;
      spec.seed = derive_seed(1234, {t});
      const auto [x, y] = gen_coupled_pair(spec);
      sum += cpte::cpte(x, y);
    }
    const double mean = sum / 200.0;
    CHECK(mean < previous);
    previous = mean;
  }
}

TEST_CASE("epoch matrix") {
  const Epoch e = random_epoch(19, 500, 8);
  const SyncMatrix m = epoch_matrix(e);
  REQUIRE(m.n == 19);
  std::vector<double> raw;
  for (std::size_t i = 0; i < 19; ++i)
    for (std::size_t j = i + 1; j < 19; ++j) raw.push_back(cpte::cpte(e.channel(i), e.channel(j)));
  CHECK(raw.size() == 171);
  const double lo = *std::min_element(raw.begin(), raw.end());
  const double hi = *std::max_element(raw.begin(), raw.end());
  CHECK(m.raw_min == lo);
  CHECK(m.raw_max == hi);
  CHECK(!m.degenerate);
  double mn = 1.0, mx = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < 19; ++i) {
    CHECK(m(i, i) == 0.0);
    for (std::size_t j = i + 1; j < 19; ++j, ++k) {
      CHECK(m(i, j) == m(j, i));
      CHECK(m(i, j) == doctest::Approx((raw[k] - lo) / (hi - lo)).epsilon(1e-14));
      mn = std::min(mn, m(i, j));
      mx = std::max(mx, m(i, j));
    }
  }
  CHECK(mn == 0.0);
  CHECK(mx == 1.0);
}

TEST_CASE("parallel matrix is bit-identical to the serial reference") {
  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const Epoch e = random_epoch(19, 2000, 100 + seed);
      const SyncMatrix p = epoch_matrix(e), s = serial::epoch_matrix(e);
      CHECK(p.values == s.values);
      CHECK(p.raw_min == s.raw_min);
      CHECK(p.raw_max == s.raw_max);
      const auto raw = raw_pair_values(e, {});
      CHECK(normalize_pairs(19, raw).values == s.values);
    }
  }
  omp_set_num_threads(1);
}

TEST_CASE("degenerate matrices") {
  SUBCASE("two channels") {
    const SyncMatrix m = epoch_matrix(random_epoch(2, 100, 1));
    CHECK(m.degenerate);
    CHECK(m(0, 1) == 0.0);
  }
  SUBCASE("identical channels") {
    Epoch e = random_epoch(5, 300, 2);
    for (std::size_t c = 1; c < 5; ++c)
      std::copy(e.samples.begin(), e.samples.begin() + 300, e.samples.begin() + static_cast<std::ptrdiff_t>(c * 300));
    const SyncMatrix m = epoch_matrix(e);
    CHECK(m.degenerate);
    for (double v : m.values) CHECK(v == 0.0);
  }
}
