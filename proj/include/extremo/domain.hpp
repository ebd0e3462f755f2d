#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace extremo {

using Coord = std::vector<std::int64_t>;

/// Lag vector split into the part acting on the fixed site set (dimension q)
/// and the part acting on the increasing grid (dimension w).
struct Lag {
  Coord fixed_part;
  Coord increasing_part;

  int dim() const {
    return static_cast<int>(fixed_part.size() + increasing_part.size());
  }
  /// Full (h_F, h_I) vector as doubles, for model evaluation.
  std::vector<double> full() const;

  bool operator==(const Lag&) const = default;
};

/// Observation domain F x I_n: a fixed duplicate-free set of integer sites
/// in Z^q crossed with the regular grid {1,...,n}^w.
///
/// Canonical site order: fixed sites in given order (outer), then I_n in
/// row-major order (last increasing coordinate fastest).
class ObservationDomain {
 public:
  ObservationDomain(std::vector<Coord> fixed_sites, std::int64_t n, int w);

  int q() const { return q_; }
  int w() const { return w_; }
  int dim() const { return q_ + w_; }
  std::int64_t n() const { return n_; }
  const std::vector<Coord>& fixed_sites() const { return fixed_sites_; }

  std::size_t size() const { return size_; }

  /// Full d-dimensional coordinates of the site at canonical index.
  Coord site(std::size_t index) const;

  /// Canonical index of a site, or npos if the coordinates are not in the
  /// domain.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t index_of(const Coord& site) const;

  /// Index of the site obtained by shifting the site at `index` by `h`,
  /// or npos if the partner leaves the domain.
  std::size_t shifted_index(std::size_t index, const Lag& h) const;

 private:
  std::vector<Coord> fixed_sites_;
  std::int64_t n_;
  int q_;
  int w_;
  std::size_t size_;
  // fixed-site lookup, linear scan is fine for the |F| sizes used here
  std::size_t fixed_index(const Coord& f) const;
};

/// Real-valued observations over a domain, one value per site in canonical
/// order.
struct SpaceTimeField {
  const ObservationDomain* domain = nullptr;
  std::vector<double> values;
};

/// Z(h) = { z in Z : z + h in Z }, preserving the order of `sites`.
std::vector<Coord> lag_closure(const std::vector<Coord>& sites, const Coord& h);

/// CSV I/O, header f1,...,fq,i1,...,iw,value. A trailing ".gz" selects the
/// gzip-compressed variant. Rows may appear in any order; they are matched
/// to sites by coordinates.
void save_field(const SpaceTimeField& field, const std::string& path);
SpaceTimeField load_field(const std::string& path, const ObservationDomain& domain,
                          bool require_positive = false);

}  // namespace extremo
