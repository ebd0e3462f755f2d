#include "extremo/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace extremo {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

GaussianFactor build_factor_points(const std::vector<std::vector<double>>& points,
                                   const DeltaFn& delta, std::size_t max_sites) {
  const std::size_t n = points.size();
  if (n == 0) throw std::invalid_argument("build_factor: no points");
  if (n > max_sites)
    throw std::runtime_error("build_factor: site count " + std::to_string(n) +
                             " exceeds cap " + std::to_string(max_sites));
  const std::size_t dim = points[0].size();
  Eigen::MatrixXd gamma(n, n);
  std::vector<double> diff(dim), d0(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < dim; ++c) diff[c] = points[i][c] - points[0][c];
    d0[i] = delta(diff);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      for (std::size_t c = 0; c < dim; ++c) diff[c] = points[i][c] - points[j][c];
      const double g = d0[i] + d0[j] - delta(diff);
      gamma(i, j) = g;
      gamma(j, i) = g;
    }
  }
  const double tr = gamma.trace();
  if (tr == 0.0) {
    // degenerate component (single distinct point, or alpha = 2 collapse at
    // identical coordinates): W is identically zero along these sites
    GaussianFactor f;
    f.chol = Eigen::MatrixXd::Zero(n, n);
    f.jitter = 0.0;
    return f;
  }
  for (double scale : {0.0, 1e-10, 1e-8}) {
    const double jitter = scale * tr / static_cast<double>(n);
    Eigen::MatrixXd m = gamma;
    m.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
      GaussianFactor f;
      f.chol = llt.matrixL();
      f.jitter = jitter;
      return f;
    }
  }
  throw std::runtime_error("build_factor: covariance not positive definite "
                           "after jitter escalation");
}

GaussianFactor build_factor(const DependenceModel& model,
                            const ObservationDomain& domain,
                            std::size_t max_sites) {
  std::vector<std::vector<double>> pts(domain.size());
  if (domain.size() > max_sites)
    throw std::runtime_error("build_factor: site count exceeds cap");
  for (std::size_t i = 0; i < domain.size(); ++i) {
    Coord s = domain.site(i);
    pts[i].assign(s.begin(), s.end());
  }
  return build_factor_points(
      pts, [&model](std::span<const double> v) { return model.dependence(v); },
      max_sites);
}

Eigen::VectorXd sample_pinned(const GaussianFactor& factor, std::size_t pin_index,
                              Rng& rng) {
  const auto n = factor.chol.rows();
  if (pin_index >= static_cast<std::size_t>(n))
    throw std::invalid_argument("sample_pinned: pin index out of range");
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  Eigen::VectorXd w = factor.chol.triangularView<Eigen::Lower>() * z;
  const double wp = w(static_cast<Eigen::Index>(pin_index));
  w.array() -= wp;
  w(static_cast<Eigen::Index>(pin_index)) = 0.0;
  return w;
}

namespace {

class DenseSampler final : public PinnedGaussianSampler {
 public:
  DenseSampler(const DependenceModel& model, const ObservationDomain& domain,
               std::size_t max_sites)
      : factor_(build_factor(model, domain, max_sites)), model_(model) {
    coords_.resize(domain.size());
    for (std::size_t i = 0; i < domain.size(); ++i) {
      Coord s = domain.site(i);
      coords_[i].assign(s.begin(), s.end());
    }
  }

  std::size_t size() const override { return coords_.size(); }

  void sample_increments(Rng& rng, std::vector<double>& w) override {
    const auto n = factor_.chol.rows();
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    Eigen::VectorXd wv = factor_.chol.triangularView<Eigen::Lower>() * z;
    w.assign(wv.data(), wv.data() + n);
  }

  void delta_to(std::size_t k, std::vector<double>& out) const override {
    const std::size_t n = coords_.size();
    out.resize(n);
    const std::size_t dim = coords_[0].size();
    std::vector<double> diff(dim);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < dim; ++c) diff[c] = coords_[i][c] - coords_[k][c];
      out[i] = model_.dependence(diff);
    }
  }

 private:
  GaussianFactor factor_;
  DependenceModel model_;
  std::vector<std::vector<double>> coords_;
};

// A coordinate-block component of a separable dependence function:
// delta(x - y) = sum_c delta_c(proj_c(x) - proj_c(y)).
struct Component {
  std::function<std::vector<double>(const Coord&)> project;
  DeltaFn delta;
};

std::vector<Component> separable_components(const DependenceModel& model) {
  const int d = model.dim();
  const auto p = model.params();
  std::vector<Component> comps;
  auto spatial_proj = [d](const Coord& s) {
    return std::vector<double>(s.begin(), s.end() - 1);
  };
  auto time_proj = [](const Coord& s) {
    return std::vector<double>{static_cast<double>(s.back())};
  };
  switch (model.family()) {
    case Family::ISO_FRAC: {
      comps.push_back({spatial_proj, [p](std::span<const double> h) {
                         double ss = 0.0;
                         for (double x : h) ss += x * x;
                         return p[0] * std::pow(std::sqrt(ss), p[2]);
                       }});
      comps.push_back({time_proj, [p](std::span<const double> u) {
                         return p[1] * std::pow(std::abs(u[0]), p[3]);
                       }});
      break;
    }
    case Family::ISO_FRAC_GEO_ANISO: {
      comps.push_back({spatial_proj, [p](std::span<const double> h) {
                         const double c = p[4], phi = p[5];
                         const double h1 = h[0] * std::cos(phi) - h[1] * std::sin(phi);
                         const double h2 =
                             c * (h[0] * std::sin(phi) + h[1] * std::cos(phi));
                         return p[0] * std::pow(std::sqrt(h1 * h1 + h2 * h2), p[2]);
                       }});
      comps.push_back({time_proj, [p](std::span<const double> u) {
                         return p[1] * std::pow(std::abs(u[0]), p[3]);
                       }});
      break;
    }
    case Family::AXIS_ANISO: {
      for (int j = 0; j < d; ++j) {
        const double C = p[j], a = p[d + j];
        comps.push_back({[j](const Coord& s) {
                           return std::vector<double>{static_cast<double>(s[j])};
                         },
                         [C, a](std::span<const double> h) {
                           return C * std::pow(std::abs(h[0]), a);
                         }});
      }
      break;
    }
    case Family::AXIS_ANISO_ROT: {
      comps.push_back({spatial_proj, [p, d](std::span<const double> h) {
                         const double phi = p[2 * d];
                         const double h1 = h[0] * std::cos(phi) - h[1] * std::sin(phi);
                         const double h2 = h[0] * std::sin(phi) + h[1] * std::cos(phi);
                         return p[0] * std::pow(std::abs(h1), p[d]) +
                                p[1] * std::pow(std::abs(h2), p[d + 1]);
                       }});
      comps.push_back({time_proj, [p, d](std::span<const double> u) {
                         return p[2] * std::pow(std::abs(u[0]), p[d + 2]);
                       }});
      break;
    }
    case Family::TIME_SHIFTED: {
      // W(s,t) = sum_i W_i(s_i - t tau_i) + W_d(t) with independent 1-D
      // fractional components reproduces the shifted dependence function.
      for (int j = 0; j + 1 < d; ++j) {
        const double C = p[j], a = p[d + j], tau = p[2 * d + j];
        comps.push_back({[j, tau](const Coord& s) {
                           return std::vector<double>{static_cast<double>(s[j]) -
                                                      static_cast<double>(s.back()) * tau};
                         },
                         [C, a](std::span<const double> h) {
                           return C * std::pow(std::abs(h[0]), a);
                         }});
      }
      const double C = p[d - 1], a = p[2 * d - 1];
      comps.push_back({time_proj, [C, a](std::span<const double> u) {
                         return C * std::pow(std::abs(u[0]), a);
                       }});
      break;
    }
  }
  return comps;
}

class SeparableSampler final : public PinnedGaussianSampler {
 public:
  SeparableSampler(const DependenceModel& model, const ObservationDomain& domain,
                   std::size_t max_sites) {
    n_ = domain.size();
    auto comps = separable_components(model);
    for (const auto& comp : comps) {
      Block b;
      std::map<std::vector<double>, std::uint32_t> ids;
      b.site_to_point.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) {
        auto key = comp.project(domain.site(i));
        auto [it, inserted] =
            ids.emplace(key, static_cast<std::uint32_t>(ids.size()));
        b.site_to_point[i] = it->second;
      }
      std::vector<std::vector<double>> pts(ids.size());
      for (const auto& [key, id] : ids) pts[id] = key;
      b.factor = build_factor_points(pts, comp.delta, max_sites);
      // pairwise dependence table over the component points
      const std::size_t m = pts.size();
      const std::size_t dim = pts[0].size();
      b.delta_table.assign(m * m, 0.0);
      std::vector<double> diff(dim);
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t c = 0; c < m; ++c) {
          for (std::size_t x = 0; x < dim; ++x) diff[x] = pts[a][x] - pts[c][x];
          b.delta_table[a * m + c] = comp.delta(diff);
        }
      }
      b.npoints = m;
      blocks_.push_back(std::move(b));
    }
  }

  std::size_t size() const override { return n_; }

  void sample_increments(Rng& rng, std::vector<double>& w) override {
    w.assign(n_, 0.0);
    for (auto& b : blocks_) {
      const auto m = static_cast<Eigen::Index>(b.npoints);
      Eigen::VectorXd z(m);
      for (Eigen::Index i = 0; i < m; ++i) z(i) = rng.normal();
      Eigen::VectorXd wc = b.factor.chol.triangularView<Eigen::Lower>() * z;
      for (std::size_t i = 0; i < n_; ++i) w[i] += wc(b.site_to_point[i]);
    }
  }

  void delta_to(std::size_t k, std::vector<double>& out) const override {
    out.assign(n_, 0.0);
    for (const auto& b : blocks_) {
      const double* row = b.delta_table.data() +
                          static_cast<std::size_t>(b.site_to_point[k]) * b.npoints;
      for (std::size_t i = 0; i < n_; ++i) out[i] += row[b.site_to_point[i]];
    }
  }

 private:
  struct Block {
    GaussianFactor factor;
    std::vector<std::uint32_t> site_to_point;
    std::vector<double> delta_table;
    std::size_t npoints = 0;
  };
  std::size_t n_ = 0;
  std::vector<Block> blocks_;
};

}  // namespace

std::unique_ptr<PinnedGaussianSampler> make_sampler(const DependenceModel& model,
                                                    const ObservationDomain& domain,
                                                    const SimOptions& opts) {
  switch (opts.sampler) {
    case SamplerKind::DENSE:
      return std::make_unique<DenseSampler>(model, domain, opts.max_sites);
    case SamplerKind::SEPARABLE:
      return std::make_unique<SeparableSampler>(model, domain, opts.max_sites);
    case SamplerKind::AUTO:
      // all supported families decompose; fall back to dense only for tiny
      // domains where the full factor is just as cheap
      if (domain.size() <= 64)
        return std::make_unique<DenseSampler>(model, domain, opts.max_sites);
      return std::make_unique<SeparableSampler>(model, domain, opts.max_sites);
  }
  throw std::logic_error("unknown sampler kind");
}

SpaceTimeField simulate_brown_resnick(PinnedGaussianSampler& sampler,
                                      const ObservationDomain& domain, Rng& rng,
                                      std::size_t max_arrivals) {
  const std::size_t n = sampler.size();
  std::vector<double> log_z(n, kNegInf), w, dk;
  for (std::size_t k = 0; k < n; ++k) {
    sampler.delta_to(k, dk);
    double zeta = rng.exponential();
    std::size_t arrivals = 1;
    while (-std::log(zeta) > log_z[k]) {
      sampler.sample_increments(rng, w);
      const double shift = w[k] + std::log(zeta);
      bool accept = true;
      for (std::size_t j = 0; j < k; ++j) {
        if (w[j] - dk[j] - shift >= log_z[j]) {
          accept = false;
          break;
        }
      }
      if (accept) {
        // the accepted function lies strictly below Z on sites before k,
        // so only sites from k onward can change
        for (std::size_t i = k; i < n; ++i)
          log_z[i] = std::max(log_z[i], w[i] - dk[i] - shift);
      }
      zeta += rng.exponential();
      if (++arrivals > max_arrivals)
        throw std::runtime_error("simulate_brown_resnick: arrival cap exceeded");
    }
  }
  SpaceTimeField field;
  field.domain = &domain;
  field.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) field.values[i] = std::exp(log_z[i]);
  return field;
}

SpaceTimeField simulate_brown_resnick(const DependenceModel& model,
                                      const ObservationDomain& domain, Rng& rng,
                                      const SimOptions& opts) {
  auto sampler = make_sampler(model, domain, opts);
  return simulate_brown_resnick(*sampler, domain, rng, opts.max_arrivals);
}

}  // namespace extremo
