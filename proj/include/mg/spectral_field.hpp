#pragma once

// Real scalar fields on the 2*pi-periodic torus T^3, stored as truncated
// Fourier-series coefficients
//
//   coeff(k) = |T^3|^{-1} \int v(x) exp(-i k.x) dx,   v(x) = sum_k coeff(k) exp(i k.x).
//
// Only the half spectrum k3 >= 0 is stored (FFTW r2c layout); coefficients with
// k3 < 0 are the complex conjugates of their mirror images, and the k3 = 0 plane
// is kept exactly Hermitian, so coeff(-k) == conj(coeff(k)) holds bit-for-bit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mg/error.hpp"
#include "mg/fft.hpp"
#include "mg/params.hpp"
#include "mg/plane.hpp"

namespace mg {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// |T^3| = (2 pi)^3.
inline constexpr double kTorusVolume = kTwoPi * kTwoPi * kTwoPi;

/// Collocation grid. The retained band is |k_i| <= (n_i - 1) / 3, the largest
/// cutoff for which products of two retained fields are alias free.
struct Grid {
  int n1 = 16;
  int n2 = 16;
  int n3 = 16;

  static Grid make(int n1, int n2, int n3) {
    Grid g{n1, n2, n3};
    g.validate();
    return g;
  }

  void validate() const {
    for (int n : {n1, n2, n3}) {
      if (n < 8 || n % 2 != 0) {
        throw InvalidArgument("Grid: every dimension must be even and >= 8, got " +
                              std::to_string(n));
      }
    }
  }

  bool operator==(const Grid&) const = default;

  int kmax1() const { return (n1 - 1) / 3; }
  int kmax2() const { return (n2 - 1) / 3; }
  int kmax3() const { return (n3 - 1) / 3; }

  int n3_half() const { return n3 / 2 + 1; }
  std::size_t real_size() const { return static_cast<std::size_t>(n1) * n2 * n3; }
  std::size_t spectral_size() const { return static_cast<std::size_t>(n1) * n2 * n3_half(); }

  bool retains(const Wavevector& k) const {
    return std::abs(k.k1) <= kmax1() && std::abs(k.k2) <= kmax2() && std::abs(k.k3) <= kmax3();
  }

  /// Storage index of a retained wavevector with k3 >= 0.
  std::size_t spectral_index(const Wavevector& k) const {
    const std::int64_t i1 = k.k1 < 0 ? k.k1 + n1 : k.k1;
    const std::int64_t i2 = k.k2 < 0 ? k.k2 + n2 : k.k2;
    return (static_cast<std::size_t>(i1) * n2 + static_cast<std::size_t>(i2)) * n3_half() +
           static_cast<std::size_t>(k.k3);
  }

  std::size_t real_index(int i1, int i2, int i3) const {
    return (static_cast<std::size_t>(i1) * n2 + static_cast<std::size_t>(i2)) * n3 +
           static_cast<std::size_t>(i3);
  }

  double x1(int i) const { return kTwoPi * i / n1; }
  double x2(int i) const { return kTwoPi * i / n2; }
  double x3(int i) const { return kTwoPi * i / n3; }

  std::string str() const {
    return std::to_string(n1) + "x" + std::to_string(n2) + "x" + std::to_string(n3);
  }
};

/// Calls f(index, k) for every retained stored wavevector (k3 >= 0).
template <class F>
void for_each_stored(const Grid& g, F&& f) {
  const int k1m = g.kmax1(), k2m = g.kmax2(), k3m = g.kmax3();
  for (int k1 = -k1m; k1 <= k1m; ++k1) {
    for (int k2 = -k2m; k2 <= k2m; ++k2) {
      const Wavevector base{k1, k2, 0};
      const std::size_t row = g.spectral_index(base);
      for (int k3 = 0; k3 <= k3m; ++k3) {
        f(row + static_cast<std::size_t>(k3), Wavevector{k1, k2, k3});
      }
    }
  }
}

/// Multiplicity of a stored entry in sums over the full lattice.
inline double lattice_weight(const Wavevector& k) { return k.k3 == 0 ? 1.0 : 2.0; }

class SpectralField {
 public:
  explicit SpectralField(const Grid& grid) : grid_(grid), c_(grid.spectral_size()) {
    grid_.validate();
  }

  /// Adopts half-spectrum storage. Entries outside the retained band are
  /// zeroed and the k3 = 0 plane is symmetrised.
  static SpectralField from_storage(const Grid& grid, ComplexBuffer data) {
    if (data.size() != grid.spectral_size()) {
      throw ShapeMismatch("SpectralField: storage size does not match grid " + grid.str());
    }
    SpectralField f(grid, std::move(data));
    f.enforce_invariants();
    return f;
  }

  const Grid& grid() const { return grid_; }
  const ComplexBuffer& storage() const { return c_; }

  /// Coefficient of exp(i k.x); zero outside the retained band.
  std::complex<double> coeff(const Wavevector& k) const {
    if (!grid_.retains(k)) return {};
    if (k.k3 < 0) return std::conj(c_[grid_.spectral_index(-k)]);
    return c_[grid_.spectral_index(k)];
  }

  /// max |coeff(k) - conj(coeff(-k))| over the retained lattice.
  double hermitian_defect() const {
    double worst = 0.0;
    for_each_stored(grid_, [&](std::size_t idx, const Wavevector& k) {
      if (k.k3 != 0) return;
      const auto mirror = c_[grid_.spectral_index(-k)];
      worst = std::max(worst, std::abs(c_[idx] - std::conj(mirror)));
    });
    return worst;
  }

  bool has_zero_vertical_mean() const {
    bool ok = true;
    for_each_stored(grid_, [&](std::size_t idx, const Wavevector& k) {
      if (k.k3 == 0 && c_[idx] != std::complex<double>{}) ok = false;
    });
    return ok;
  }

  /// Number of nonzero coefficients on the full lattice.
  std::size_t nonzero_count() const {
    std::size_t n = 0;
    for_each_stored(grid_, [&](std::size_t idx, const Wavevector& k) {
      if (c_[idx] != std::complex<double>{}) n += k.k3 == 0 ? 1 : 2;
    });
    return n;
  }

  SpectralField scaled(double a) const {
    SpectralField out(*this);
    for (auto& v : out.c_) v *= a;
    return out;
  }

  /// this + a * other.
  SpectralField axpy(double a, const SpectralField& other) const {
    check_same_grid(other);
    SpectralField out(*this);
    for (std::size_t i = 0; i < c_.size(); ++i) out.c_[i] += a * other.c_[i];
    return out;
  }

  friend SpectralField operator+(const SpectralField& a, const SpectralField& b) {
    return a.axpy(1.0, b);
  }
  friend SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    return a.axpy(-1.0, b);
  }
  friend SpectralField operator*(double s, const SpectralField& a) { return a.scaled(s); }

  void check_same_grid(const SpectralField& other) const {
    if (!(grid_ == other.grid_)) {
      throw ShapeMismatch("SpectralField: grids differ (" + grid_.str() + " vs " +
                          other.grid_.str() + ")");
    }
  }

 private:
  SpectralField(const Grid& grid, ComplexBuffer data) : grid_(grid), c_(std::move(data)) {}

  void enforce_invariants() {
    std::vector<char> keep(c_.size(), 0);
    for_each_stored(grid_, [&](std::size_t idx, const Wavevector&) { keep[idx] = 1; });
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (!keep[i]) c_[i] = {};
    }
    for_each_stored(grid_, [&](std::size_t idx, const Wavevector& k) {
      if (k.k3 != 0) return;
      const std::size_t mirror = grid_.spectral_index(-k);
      if (mirror < idx) return;
      if (mirror == idx) {
        c_[idx] = {c_[idx].real(), 0.0};
        return;
      }
      const auto avg = 0.5 * (c_[idx] + std::conj(c_[mirror]));
      c_[idx] = avg;
      c_[mirror] = std::conj(avg);
    });
  }

  friend class FieldBuilder;

  Grid grid_;
  ComplexBuffer c_;
};

/// Staging area for constructing a SpectralField coefficient by coefficient.
/// Writing coeff(k) implicitly writes coeff(-k) = conj(coeff(k)).
class FieldBuilder {
 public:
  explicit FieldBuilder(const Grid& grid) : field_(grid) {}
  explicit FieldBuilder(SpectralField start) : field_(std::move(start)) {}

  /// Throws TruncationError for k outside the retained band.
  FieldBuilder& set(const Wavevector& k, std::complex<double> value) {
    write(k, value, false);
    return *this;
  }

  FieldBuilder& add(const Wavevector& k, std::complex<double> value) {
    write(k, value, true);
    return *this;
  }

  /// Adds amp * cos(k.x).
  FieldBuilder& add_cos(const Wavevector& k, double amp) {
    if (k == Wavevector{}) return add(k, amp);
    add(k, 0.5 * amp);
    return *this;
  }

  /// Adds amp * sin(k.x).
  FieldBuilder& add_sin(const Wavevector& k, double amp) {
    if (k == Wavevector{}) return *this;
    add(k, std::complex<double>(0.0, -0.5 * amp));
    return *this;
  }

  SpectralField build() const { return field_; }

 private:
  void write(Wavevector k, std::complex<double> value, bool accumulate) {
    const Grid& g = field_.grid_;
    if (!g.retains(k)) {
      throw TruncationError("FieldBuilder: " + to_string(k) + " outside the retained band of " +
                            g.str());
    }
    if (k.k3 < 0) {
      k = -k;
      value = std::conj(value);
    }
    auto& c = field_.c_;
    const std::size_t idx = g.spectral_index(k);
    if (k.k3 == 0 && k == -k) {
      c[idx] = accumulate ? c[idx] + value.real() : std::complex<double>(value.real(), 0.0);
      return;
    }
    c[idx] = accumulate ? c[idx] + value : value;
    if (k.k3 == 0) c[g.spectral_index(-k)] = std::conj(c[idx]);
  }

  SpectralField field_;
};

/// Real samples on the n1 x n2 x n3 collocation grid, x_i = 2 pi j / n_i.
class PhysicalField {
 public:
  explicit PhysicalField(const Grid& grid) : grid_(grid), v_(grid.real_size(), 0.0) {
    grid_.validate();
  }

  PhysicalField(const Grid& grid, std::span<const double> values) : PhysicalField(grid) {
    if (values.size() != grid.real_size()) {
      throw ShapeMismatch("PhysicalField: " + std::to_string(values.size()) +
                          " samples for grid " + grid.str());
    }
    std::copy(values.begin(), values.end(), v_.begin());
  }

  template <class F>
  static PhysicalField sample(const Grid& grid, F&& f) {
    PhysicalField out(grid);
    for (int i1 = 0; i1 < grid.n1; ++i1) {
      for (int i2 = 0; i2 < grid.n2; ++i2) {
        for (int i3 = 0; i3 < grid.n3; ++i3) {
          out.v_[grid.real_index(i1, i2, i3)] = f(grid.x1(i1), grid.x2(i2), grid.x3(i3));
        }
      }
    }
    return out;
  }

  const Grid& grid() const { return grid_; }
  const RealBuffer& values() const { return v_; }
  double at(int i1, int i2, int i3) const { return v_[grid_.real_index(i1, i2, i3)]; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::fabs(x));
    return m;
  }

 private:
  friend PhysicalField inverse(const SpectralField& field);
  friend class Transformer;

  Grid grid_;
  RealBuffer v_;
};

/// Reusable forward/inverse transforms with private scratch space. One
/// instance per thread; the underlying FFTW plans are shared.
class Transformer {
 public:
  explicit Transformer(const Grid& grid)
      : grid_(grid),
        plans_(plans_for(grid.n1, grid.n2, grid.n3)),
        scratch_(grid.spectral_size()) {}

  const Grid& grid() const { return grid_; }

  /// Fourier-series coefficients of real samples, truncated to the retained band.
  SpectralField forward(const RealBuffer& values) {
    if (values.size() != grid_.real_size()) {
      throw ShapeMismatch("forward: sample count does not match grid " + grid_.str());
    }
    ComplexBuffer out(grid_.spectral_size());
    plans_->forward(values, out);
    const double norm = 1.0 / static_cast<double>(grid_.real_size());
    for (auto& c : out) c *= norm;
    return SpectralField::from_storage(grid_, std::move(out));
  }

  /// Samples of sum_k coeff(k) exp(i k.x) written into `out`.
  void inverse_into(const ComplexBuffer& coeffs, RealBuffer& out) {
    std::copy(coeffs.begin(), coeffs.end(), scratch_.begin());
    out.resize(grid_.real_size());
    plans_->backward(scratch_, out);
  }

 private:
  Grid grid_;
  std::shared_ptr<const FftPlans> plans_;
  ComplexBuffer scratch_;
};

inline SpectralField forward(const PhysicalField& values) {
  Transformer t(values.grid());
  return t.forward(values.values());
}

inline SpectralField forward(const Grid& grid, std::span<const double> values) {
  return forward(PhysicalField(grid, values));
}

inline PhysicalField inverse(const SpectralField& field) {
  Transformer t(field.grid());
  PhysicalField out(field.grid());
  t.inverse_into(field.storage(), out.v_);
  return out;
}

inline SpectralField project_zero_vertical_mean(const SpectralField& field) {
  ComplexBuffer c = field.storage();
  for_each_stored(field.grid(), [&](std::size_t idx, const Wavevector& k) {
    if (k.k3 == 0) c[idx] = {};
  });
  return SpectralField::from_storage(field.grid(), std::move(c));
}

inline SpectralField project_plane(const SpectralField& field, const PlaneSpec& plane) {
  ComplexBuffer c = field.storage();
  for_each_stored(field.grid(), [&](std::size_t idx, const Wavevector& k) {
    if (!plane.contains(k)) c[idx] = {};
  });
  return SpectralField::from_storage(field.grid(), std::move(c));
}

/// sum over k not in P_q of |coeff(k)|^2.
inline double off_plane_energy(const SpectralField& field, const PlaneSpec& plane) {
  double e = 0.0;
  const auto& c = field.storage();
  for_each_stored(field.grid(), [&](std::size_t idx, const Wavevector& k) {
    if (!plane.contains(k)) e += lattice_weight(k) * std::norm(c[idx]);
  });
  return e;
}

/// sum_k |coeff(k)|^2, the mean square of the field over T^3.
inline double mean_square(const SpectralField& field) {
  double e = 0.0;
  const auto& c = field.storage();
  for_each_stored(field.grid(),
                  [&](std::size_t idx, const Wavevector& k) { e += lattice_weight(k) * std::norm(c[idx]); });
  return e;
}

/// Re sum_k conj(a_k) b_k.
inline double inner(const SpectralField& a, const SpectralField& b) {
  a.check_same_grid(b);
  double s = 0.0;
  const auto& ca = a.storage();
  const auto& cb = b.storage();
  for_each_stored(a.grid(), [&](std::size_t idx, const Wavevector& k) {
    s += lattice_weight(k) * (ca[idx].real() * cb[idx].real() + ca[idx].imag() * cb[idx].imag());
  });
  return s;
}

/// sqrt(sum_k |k|^{2s} |coeff(k)|^2); the k = 0 term counts with weight 1 at s = 0.
inline double hs_norm(const SpectralField& field, double s) {
  double e = 0.0;
  const auto& c = field.storage();
  for_each_stored(field.grid(), [&](std::size_t idx, const Wavevector& k) {
    const double w = std::pow(static_cast<double>(k.norm_sq()), s);
    e += lattice_weight(k) * w * std::norm(c[idx]);
  });
  return std::sqrt(e);
}

/// L^2(T^3) norm via Parseval.
inline double l2_norm(const SpectralField& field) {
  return std::sqrt(mean_square(field) * kTorusVolume);
}

/// Max |v| over the collocation points; a lower bound for the true sup norm.
inline double linf_norm(const SpectralField& field) { return inverse(field).max_abs(); }

struct Norms {
  double l2 = 0.0;
  double linf = 0.0;
  double hs = 0.0;
};

inline Norms norms(const SpectralField& field, double s = 1.0) {
  return {l2_norm(field), linf_norm(field), hs_norm(field, s)};
}

/// Rescales the field to unit H^s seminorm (see hs_norm). Throws for a zero field.
inline SpectralField normalize_hs(const SpectralField& field, double s) {
  const double n = hs_norm(field, s);
  if (n == 0.0) throw InvalidArgument("normalize_hs: zero field");
  return field.scaled(1.0 / n);
}

/// Shell spectrum: entry n holds sum of |coeff(k)|^2 over n - 1/2 <= |k| < n + 1/2.
inline std::vector<double> energy_spectrum(const SpectralField& field) {
  const Grid& g = field.grid();
  const double kmax = std::sqrt(static_cast<double>(g.kmax1() * g.kmax1() + g.kmax2() * g.kmax2() +
                                                    g.kmax3() * g.kmax3()));
  std::vector<double> shells(static_cast<std::size_t>(std::lround(kmax)) + 1, 0.0);
  const auto& c = field.storage();
  for_each_stored(g, [&](std::size_t idx, const Wavevector& k) {
    const auto n = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(k.norm_sq()))));
    shells[n] += lattice_weight(k) * std::norm(c[idx]);
  });
  return shells;
}

// Snapshot text format:
//   MGFIELD v1 n1 n2 n3
//   k1 k2 k3 re im        (every retained coefficient with |coeff| >= 1e-16)

inline constexpr double kSnapshotFloor = 1e-16;

inline void write_snapshot(std::ostream& os, const SpectralField& field) {
  const Grid& g = field.grid();
  os << "MGFIELD v1 " << g.n1 << ' ' << g.n2 << ' ' << g.n3 << '\n';
  std::ostringstream line;
  line.precision(std::numeric_limits<double>::max_digits10);
  for (int k1 = -g.kmax1(); k1 <= g.kmax1(); ++k1) {
    for (int k2 = -g.kmax2(); k2 <= g.kmax2(); ++k2) {
      for (int k3 = -g.kmax3(); k3 <= g.kmax3(); ++k3) {
        const auto c = field.coeff({k1, k2, k3});
        if (std::abs(c) < kSnapshotFloor) continue;
        line.str("");
        line << k1 << ' ' << k2 << ' ' << k3 << ' ' << c.real() << ' ' << c.imag() << '\n';
        os << line.str();
      }
    }
  }
}

/// Throws ParseError on a malformed header, a coefficient outside the band, or
/// a pair (k, -k) that is not complex conjugate.
inline SpectralField read_snapshot(std::istream& is) {
  std::string magic, version;
  int n1 = 0, n2 = 0, n3 = 0;
  if (!(is >> magic >> version >> n1 >> n2 >> n3) || magic != "MGFIELD" || version != "v1") {
    throw ParseError("snapshot: expected header 'MGFIELD v1 n1 n2 n3'");
  }
  Grid g{n1, n2, n3};
  try {
    g.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("snapshot: ") + e.what());
  }
  struct Entry {
    Wavevector k;
    std::complex<double> c;
  };
  std::vector<Entry> entries;
  std::int64_t k1, k2, k3;
  double re, im;
  while (is >> k1 >> k2 >> k3 >> re >> im) {
    const Wavevector k{k1, k2, k3};
    if (!g.retains(k)) throw ParseError("snapshot: " + to_string(k) + " outside retained band");
    entries.push_back({k, {re, im}});
  }
  if (!is.eof()) throw ParseError("snapshot: malformed coefficient line");

  FieldBuilder b(g);
  for (const auto& e : entries) {
    if (e.k.k3 > 0 || (e.k.k3 == 0 && (e.k.k1 > 0 || (e.k.k1 == 0 && e.k.k2 >= 0)))) {
      b.set(e.k, e.c);
    }
  }
  SpectralField f = b.build();
  for (const auto& e : entries) {
    if (f.coeff(e.k) != e.c) {
      throw ParseError("snapshot: coefficient at " + to_string(e.k) +
                       " is not the conjugate of its mirror");
    }
  }
  return f;
}

}  // namespace mg
