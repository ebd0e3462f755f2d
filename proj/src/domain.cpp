#include "extremo/domain.hpp"

#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>
#include <sstream>
#include <stdexcept>

namespace extremo {

std::vector<double> Lag::full() const {
  std::vector<double> v;
  v.reserve(fixed_part.size() + increasing_part.size());
  for (auto x : fixed_part) v.push_back(static_cast<double>(x));
  for (auto x : increasing_part) v.push_back(static_cast<double>(x));
  return v;
}

ObservationDomain::ObservationDomain(std::vector<Coord> fixed_sites,
                                     std::int64_t n, int w)
    : fixed_sites_(std::move(fixed_sites)), n_(n), w_(w) {
  if (n_ < 1) throw std::invalid_argument("domain: n must be >= 1");
  if (w_ < 1) throw std::invalid_argument("domain: w must be >= 1");
  if (fixed_sites_.empty()) {
    // q = 0: pure increasing grid, singleton empty coordinate
    fixed_sites_.push_back({});
  }
  q_ = static_cast<int>(fixed_sites_[0].size());
  std::set<Coord> seen;
  for (const auto& f : fixed_sites_) {
    if (static_cast<int>(f.size()) != q_)
      throw std::invalid_argument("domain: fixed sites have mixed dimensions");
    if (!seen.insert(f).second)
      throw std::invalid_argument("domain: duplicate fixed site");
  }
  double grid = std::pow(static_cast<double>(n_), w_);
  if (grid * static_cast<double>(fixed_sites_.size()) > 1e15)
    throw std::invalid_argument("domain: site count overflow");
  std::size_t g = 1;
  for (int j = 0; j < w_; ++j) g *= static_cast<std::size_t>(n_);
  size_ = fixed_sites_.size() * g;
}

Coord ObservationDomain::site(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("domain: site index");
  std::size_t g = size_ / fixed_sites_.size();
  std::size_t fi = index / g;
  std::size_t rem = index % g;
  Coord out = fixed_sites_[fi];
  out.resize(q_ + w_);
  for (int j = w_ - 1; j >= 0; --j) {
    out[q_ + j] = static_cast<std::int64_t>(rem % n_) + 1;
    rem /= n_;
  }
  return out;
}

std::size_t ObservationDomain::fixed_index(const Coord& f) const {
  for (std::size_t i = 0; i < fixed_sites_.size(); ++i)
    if (fixed_sites_[i] == f) return i;
  return npos;
}

std::size_t ObservationDomain::index_of(const Coord& s) const {
  if (static_cast<int>(s.size()) != dim()) return npos;
  Coord f(s.begin(), s.begin() + q_);
  std::size_t fi = fixed_index(f);
  if (fi == npos) return npos;
  std::size_t rem = 0;
  for (int j = 0; j < w_; ++j) {
    std::int64_t c = s[q_ + j];
    if (c < 1 || c > n_) return npos;
    rem = rem * n_ + static_cast<std::size_t>(c - 1);
  }
  return fi * (size_ / fixed_sites_.size()) + rem;
}

std::size_t ObservationDomain::shifted_index(std::size_t index, const Lag& h) const {
  if (static_cast<int>(h.fixed_part.size()) != q_ ||
      static_cast<int>(h.increasing_part.size()) != w_)
    throw std::invalid_argument("lag dimension does not match domain");
  Coord s = site(index);
  for (int j = 0; j < q_; ++j) s[j] += h.fixed_part[j];
  for (int j = 0; j < w_; ++j) s[q_ + j] += h.increasing_part[j];
  return index_of(s);
}

std::vector<Coord> lag_closure(const std::vector<Coord>& sites, const Coord& h) {
  std::set<Coord> in(sites.begin(), sites.end());
  std::vector<Coord> out;
  for (const auto& z : sites) {
    if (z.size() != h.size())
      throw std::invalid_argument("lag_closure: dimension mismatch");
    Coord zh = z;
    for (std::size_t j = 0; j < h.size(); ++j) zh[j] += h[j];
    if (in.count(zh)) out.push_back(z);
  }
  return out;
}

namespace {

bool has_gz_suffix(const std::string& path) {
  return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

// Minimal line-oriented writer/reader over either stdio or zlib.
class LineWriter {
 public:
  explicit LineWriter(const std::string& path) : gz_(has_gz_suffix(path)) {
    if (gz_) {
      gzf_ = gzopen(path.c_str(), "wb");
      if (!gzf_) throw std::runtime_error("cannot open " + path);
    } else {
      f_ = std::fopen(path.c_str(), "wb");
      if (!f_) throw std::runtime_error("cannot open " + path);
    }
  }
  ~LineWriter() {
    if (gz_ && gzf_) gzclose(gzf_);
    if (!gz_ && f_) std::fclose(f_);
  }
  void write(const std::string& line) {
    if (gz_) {
      if (gzwrite(gzf_, line.data(), static_cast<unsigned>(line.size())) !=
          static_cast<int>(line.size()))
        throw std::runtime_error("gzip write failed");
    } else {
      if (std::fwrite(line.data(), 1, line.size(), f_) != line.size())
        throw std::runtime_error("write failed");
    }
  }

 private:
  bool gz_;
  gzFile gzf_ = nullptr;
  std::FILE* f_ = nullptr;
};

class LineReader {
 public:
  explicit LineReader(const std::string& path) : gz_(has_gz_suffix(path)) {
    if (gz_) {
      gzf_ = gzopen(path.c_str(), "rb");
      if (!gzf_) throw std::runtime_error("cannot open " + path);
    } else {
      f_ = std::fopen(path.c_str(), "rb");
      if (!f_) throw std::runtime_error("cannot open " + path);
    }
  }
  ~LineReader() {
    if (gz_ && gzf_) gzclose(gzf_);
    if (!gz_ && f_) std::fclose(f_);
  }
  bool getline(std::string& out) {
    out.clear();
    int c;
    while ((c = getc_()) != -1) {
      if (c == '\n') return true;
      if (c != '\r') out.push_back(static_cast<char>(c));
    }
    return !out.empty();
  }

 private:
  int getc_() { return gz_ ? gzgetc(gzf_) : std::fgetc(f_); }
  bool gz_;
  gzFile gzf_ = nullptr;
  std::FILE* f_ = nullptr;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void save_field(const SpaceTimeField& field, const std::string& path) {
  const ObservationDomain& dom = *field.domain;
  if (field.values.size() != dom.size())
    throw std::invalid_argument("save_field: value count mismatch");
  LineWriter out(path);
  std::string header;
  for (int j = 0; j < dom.q(); ++j) header += "f" + std::to_string(j + 1) + ",";
  for (int j = 0; j < dom.w(); ++j) header += "i" + std::to_string(j + 1) + ",";
  header += "value\n";
  out.write(header);
  char buf[64];
  for (std::size_t i = 0; i < dom.size(); ++i) {
    Coord s = dom.site(i);
    std::string line;
    for (auto c : s) line += std::to_string(c) + ",";
    std::snprintf(buf, sizeof(buf), "%.17g\n", field.values[i]);
    line += buf;
    out.write(line);
  }
}

SpaceTimeField load_field(const std::string& path, const ObservationDomain& domain,
                          bool require_positive) {
  LineReader in(path);
  std::string line;
  if (!in.getline(line)) throw std::runtime_error("load_field: empty file " + path);
  const std::size_t ncols = static_cast<std::size_t>(domain.dim()) + 1;
  if (split_csv(line).size() != ncols)
    throw std::runtime_error("load_field: bad header in " + path);

  SpaceTimeField field;
  field.domain = &domain;
  field.values.assign(domain.size(), 0.0);
  std::vector<char> seen(domain.size(), 0);
  std::size_t count = 0;
  while (in.getline(line)) {
    if (line.empty()) continue;
    auto cols = split_csv(line);
    if (cols.size() != ncols)
      throw std::runtime_error("load_field: bad row: " + line);
    Coord s(domain.dim());
    for (int j = 0; j < domain.dim(); ++j) {
      errno = 0;
      char* end = nullptr;
      long long v = std::strtoll(cols[j].c_str(), &end, 10);
      if (errno || end == cols[j].c_str() || *end != '\0')
        throw std::runtime_error("load_field: unparseable coordinate: " + cols[j]);
      s[j] = v;
    }
    errno = 0;
    char* end = nullptr;
    double val = std::strtod(cols.back().c_str(), &end);
    if (errno || end == cols.back().c_str() || *end != '\0' || !std::isfinite(val))
      throw std::runtime_error("load_field: unparseable value: " + cols.back());
    if (require_positive && val <= 0.0)
      throw std::runtime_error("load_field: non-positive value: " + cols.back());
    std::size_t idx = domain.index_of(s);
    if (idx == ObservationDomain::npos)
      throw std::runtime_error("load_field: extra site: " + line);
    if (seen[idx]) throw std::runtime_error("load_field: duplicate site: " + line);
    seen[idx] = 1;
    field.values[idx] = val;
    ++count;
  }
  if (count != domain.size()) {
    for (std::size_t i = 0; i < domain.size(); ++i) {
      if (!seen[i]) {
        std::string msg = "load_field: missing site";
        for (auto c : domain.site(i)) msg += " " + std::to_string(c);
        throw std::runtime_error(msg);
      }
    }
  }
  return field;
}

}  // namespace extremo
