#include "sigmav/moments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "sigmav/error.hpp"
#include "sigmav/parallel.hpp"

namespace sigmav {

BaseSpec BaseSpec::parse(const std::string& name) {
  if (name == "uniform") return uniform(-0.5, 0.5);
  if (name == "gaussian") return gaussian();
  if (name == "exponential") return exponential();
  if (name == "rademacher") return rademacher();
  if (name == "constant") return constant(1.0);
  throw ContractError("unknown base distribution '" + name + "'");
}

std::string BaseSpec::name() const {
  switch (kind) {
    case BaseKind::Uniform: return "uniform";
    case BaseKind::Gaussian: return "gaussian";
    case BaseKind::Exponential: return "exponential";
    case BaseKind::Rademacher: return "rademacher";
    case BaseKind::Constant: return "constant";
  }
  return "unknown";
}

double BaseSpec::mean() const {
  switch (kind) {
    case BaseKind::Uniform: return 0.5 * (a + b);
    case BaseKind::Gaussian: return a;
    case BaseKind::Exponential: return 1.0 / a;
    case BaseKind::Rademacher: return 0.0;
    case BaseKind::Constant: return a;
  }
  return 0.0;
}

double BaseSpec::variance() const {
  switch (kind) {
    case BaseKind::Uniform: return (b - a) * (b - a) / 12.0;
    case BaseKind::Gaussian: return b * b;
    case BaseKind::Exponential: return 1.0 / (a * a);
    case BaseKind::Rademacher: return 1.0;
    case BaseKind::Constant: return 0.0;
  }
  return 0.0;
}

double BaseSpec::kappa4() const {
  const double var = variance();
  switch (kind) {
    case BaseKind::Uniform: return -1.2 * var * var;  // -(b-a)^4 / 120
    case BaseKind::Gaussian: return 0.0;
    case BaseKind::Exponential: return 6.0 / std::pow(a, 4);
    case BaseKind::Rademacher: return -2.0;
    case BaseKind::Constant: return 0.0;
  }
  return 0.0;
}

bool BaseSpec::symmetric() const { return kind != BaseKind::Exponential; }

void BaseSpec::validate() const {
  if (kind == BaseKind::Uniform && !(b > a)) throw ContractError("uniform base needs b > a");
  if (kind == BaseKind::Gaussian && !(b > 0.0)) throw ContractError("gaussian base needs sd > 0");
  if (kind == BaseKind::Exponential && !(a > 0.0)) throw ContractError("exponential base needs rate > 0");
}

double BaseSpec::draw(std::mt19937_64& rng) const {
  switch (kind) {
    case BaseKind::Uniform: return std::uniform_real_distribution<double>(a, b)(rng);
    case BaseKind::Gaussian: return std::normal_distribution<double>(a, b)(rng);
    case BaseKind::Exponential: return std::exponential_distribution<double>(a)(rng);
    case BaseKind::Rademacher: return (rng() >> 63) ? 1.0 : -1.0;
    case BaseKind::Constant: return a;
  }
  return 0.0;
}

namespace {

constexpr std::int64_t kChunk = 1000;

std::uint64_t ladder_seed(std::uint64_t seed, int n, std::uint64_t salt) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(n) * 0x9E3779B97F4A7C15ull + salt));
}

struct PowerSums {
  double n = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  void add(double x) {
    n += 1;
    s1 += x;
    s2 += x * x;
    s3 += x * x * x;
    s4 += x * x * x * x;
  }
  PowerSums minus(const PowerSums& o) const { return {n - o.n, s1 - o.s1, s2 - o.s2, s3 - o.s3, s4 - o.s4}; }
  PowerSums plus(const PowerSums& o) const { return {n + o.n, s1 + o.s1, s2 + o.s2, s3 + o.s3, s4 + o.s4}; }
};

struct Central {
  double b, c, d;
};

Central central(const PowerSums& p) {
  const double m1 = p.s1 / p.n, m2 = p.s2 / p.n, m3 = p.s3 / p.n, m4 = p.s4 / p.n;
  return {m2 - m1 * m1, m3 - 3 * m1 * m2 + 2 * m1 * m1 * m1, m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * m1 * m1 * m1 * m1};
}

}  // namespace

std::vector<double> sum_function_samples(const BaseSpec& base, int n, std::int64_t trials, std::uint64_t seed,
                                         int threads) {
  base.validate();
  if (n < 1) throw ContractError("sum function needs N >= 1");
  if (trials < 1) throw ContractError("sum function needs trials >= 1");
  std::vector<double> out(static_cast<std::size_t>(trials));
  const std::size_t chunks = static_cast<std::size_t>((trials + kChunk - 1) / kChunk);
  const double mu = base.mean();
  const std::uint64_t s = ladder_seed(seed, n, 0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    auto rng = stream_engine(s, c);
    const std::int64_t lo = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t hi = std::min(trials, lo + kChunk);
    for (std::int64_t t = lo; t < hi; ++t) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) sum += base.draw(rng) - mu;
      out[t] = sum / n;
    }
  });
  return out;
}

double gaussianity_distance(const std::vector<double>& samples) {
  if (samples.size() < 10000) throw ContractError("gaussianity_distance needs at least 1e4 samples");
  return ks_distance_normal(samples);
}

MomentReport sum_function_moments(const BaseSpec& base, const std::vector<int>& ladder, std::int64_t trials,
                                  std::uint64_t seed, int threads) {
  if (trials < 10000) throw ContractError("sum_function_moments: trials must be >= 1e4");
  if (ladder.empty()) throw ContractError("sum_function_moments: empty N ladder");
  MomentReport rep;
  rep.base = base;
  rep.seed = seed;
  constexpr int kBlocks = 20;
  for (int n : ladder) {
    const std::vector<double> x = sum_function_samples(base, n, trials, seed, threads);
    std::vector<PowerSums> blocks(kBlocks);
    PowerSums all;
    for (std::size_t i = 0; i < x.size(); ++i) blocks[i * kBlocks / x.size()].add(x[i]);
    for (const auto& b : blocks) all = all.plus(b);

    MomentRow r;
    r.n = n;
    r.trials = trials;
    const Central c = central(all);
    r.b = c.b;
    r.c = c.c;
    r.d = c.d;
    r.k = c.d - 3.0 * c.b * c.b;
    r.k_tilde = c.d / 3.0 - c.b * c.b;
    auto jk = [&](auto&& pick) {
      return jackknife(kBlocks, [&](int left) { return pick(central(left < 0 ? all : all.minus(blocks[left]))); });
    };
    r.b_err = jk([](const Central& m) { return m.b; }).error;
    r.c_err = jk([](const Central& m) { return m.c; }).error;
    r.d_err = jk([](const Central& m) { return m.d; }).error;
    r.k_err = jk([](const Central& m) { return m.d - 3.0 * m.b * m.b; }).error;
    const double nd = n;
    r.nb = nd * r.b;
    r.n2c = nd * nd * r.c;
    r.n3k = nd * nd * nd * r.k;
    r.nb_err = nd * r.b_err;
    r.n2c_err = nd * nd * r.c_err;
    r.n3k_err = nd * nd * nd * r.k_err;
    r.ks = base.kind == BaseKind::Constant ? 0.0 : gaussianity_distance(x);
    rep.rows.push_back(r);
  }
  if (ladder.size() >= 2 && base.kind != BaseKind::Constant) {
    std::vector<double> ns, bs, ks;
    for (const auto& r : rep.rows) {
      ns.push_back(r.n);
      bs.push_back(r.b);
      ks.push_back(r.k);
    }
    rep.b_fit = fit_loglog(ns, bs);
    bool nonzero = std::all_of(ks.begin(), ks.end(), [](double v) { return v != 0.0; });
    if (nonzero) rep.k_fit = fit_loglog(ns, ks);
  }
  return rep;
}

RatioReport ratio_average_check(const BaseSpec& x, const BaseSpec& y, const std::vector<int>& ladder,
                                std::int64_t trials, std::uint64_t seed, int threads, bool y_is_x) {
  x.validate();
  y.validate();
  if (trials < 2 * 20) throw ContractError("ratio_average_check: too few trials");
  RatioReport rep;
  constexpr int kBlocks = 20;
  for (int n : ladder) {
    if (n < 1) throw ContractError("ratio_average_check: N must be >= 1");
    std::vector<double> xs(static_cast<std::size_t>(trials)), ys(static_cast<std::size_t>(trials));
    const std::size_t chunks = static_cast<std::size_t>((trials + kChunk - 1) / kChunk);
    const std::uint64_t s = ladder_seed(seed, n, 1);
    parallel_for(chunks, threads, [&](std::size_t c) {
      auto rng = stream_engine(s, c);
      const std::int64_t lo = static_cast<std::int64_t>(c) * kChunk;
      const std::int64_t hi = std::min(trials, lo + kChunk);
      for (std::int64_t t = lo; t < hi; ++t) {
        double sx = 0.0, sy = 0.0;
        for (int k = 0; k < n; ++k) sx += x.draw(rng);
        if (y_is_x) {
          sy = sx;
        } else {
          for (int k = 0; k < n; ++k) sy += y.draw(rng);
        }
        if (!(sy > 0.0)) throw ContractError("ratio_average_check: non-positive Y realization");
        xs[t] = sx;
        ys[t] = sy;
      }
    });
    struct Acc {
      double n = 0, r = 0, x = 0, y = 0;
    };
    std::vector<Acc> blocks(kBlocks);
    Acc all;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      Acc& b = blocks[i * kBlocks / xs.size()];
      b.n += 1;
      b.r += xs[i] / ys[i];
      b.x += xs[i];
      b.y += ys[i];
    }
    for (const auto& b : blocks) {
      all.n += b.n;
      all.r += b.r;
      all.x += b.x;
      all.y += b.y;
    }
    auto gap_of = [](const Acc& a) { return a.r / a.n - (a.x / a.n) / (a.y / a.n); };
    const Estimate e = jackknife(kBlocks, [&](int left) {
      if (left < 0) return gap_of(all);
      const Acc& b = blocks[left];
      return gap_of({all.n - b.n, all.r - b.r, all.x - b.x, all.y - b.y});
    });
    RatioRow row;
    row.n = n;
    row.gap = e.value;
    row.error = e.error;
    row.mean_ratio = all.r / all.n;
    row.ratio_of_means = all.x / all.y;
    rep.rows.push_back(row);
  }
  std::vector<double> ns, gs;
  for (const auto& r : rep.rows)
    if (r.gap != 0.0) {
      ns.push_back(r.n);
      gs.push_back(r.gap);
    }
  if (ns.size() >= 2) {
    rep.fit = fit_loglog(ns, gs);
    rep.fitted = true;
  }
  return rep;
}

void write_moment_csv(std::ostream& os, const MomentReport& report) {
  os << "N,B,C,D,K,Ktilde,NB,N2C,N3K,NB_err,N2C_err,N3K_err,KS\n";
  os << std::setprecision(12);
  for (const auto& r : report.rows) {
    os << r.n << ',' << r.b << ',' << r.c << ',' << r.d << ',' << r.k << ',' << r.k_tilde << ',' << r.nb << ','
       << r.n2c << ',' << r.n3k << ',' << r.nb_err << ',' << r.n2c_err << ',' << r.n3k_err << ',' << r.ks << '\n';
  }
}

}  // namespace sigmav
