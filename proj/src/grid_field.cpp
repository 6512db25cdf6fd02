#include "sbpp/grid_field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fft_backend.hpp"
#include "sbpp/errors.hpp"

namespace sbpp {

// --- TorusGrid --------------------------------------------------------------

TorusGrid::TorusGrid(int n_per_axis, double period_length)
    : n_(n_per_axis), length_(period_length) {
  if (n_ < 8 || n_ % 2 != 0) {
    throw ParameterError("TorusGrid: n_per_axis must be even and >= 8, got " +
                         std::to_string(n_));
  }
  if (!(length_ > 0.0) || !std::isfinite(length_)) {
    throw ParameterError("TorusGrid: period_length must be positive and finite");
  }
}

double TorusGrid::k0() const noexcept { return 2.0 * std::numbers::pi / length_; }

std::array<int, 3> TorusGrid::multi_index(std::size_t idx) const noexcept {
  const auto n = static_cast<std::size_t>(n_);
  return {static_cast<int>(idx % n), static_cast<int>((idx / n) % n),
          static_cast<int>(idx / (n * n))};
}

TorusPoint TorusGrid::node(std::size_t idx) const noexcept {
  const auto m = multi_index(idx);
  const double h = spacing();
  return {h * m[0], h * m[1], h * m[2]};
}

double TorusGrid::periodic_delta(double a, double b) const noexcept {
  double d = std::fmod(b - a, length_);
  if (d < -0.5 * length_) d += length_;
  if (d >= 0.5 * length_) d -= length_;
  return d;
}

double TorusGrid::distance(const TorusPoint& a, const TorusPoint& b) const noexcept {
  double s = 0.0;
  for (int ax = 0; ax < 3; ++ax) {
    const double d = periodic_delta(a[ax], b[ax]);
    s += d * d;
  }
  return std::sqrt(s);
}

TorusPoint TorusGrid::wrap(const TorusPoint& x) const noexcept {
  TorusPoint out{};
  for (int ax = 0; ax < 3; ++ax) {
    double v = std::fmod(x[ax], length_);
    if (v < 0.0) v += length_;
    if (v >= length_) v -= length_;
    out[ax] = v;
  }
  return out;
}

// --- ScalarField ------------------------------------------------------------

ScalarField::ScalarField(TorusGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ParameterError("ScalarField: expected " + std::to_string(grid_.size()) +
                         " values, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ParameterError("ScalarField: non-finite value");
  }
}

ScalarField::ScalarField(TorusGrid grid, std::vector<double> values, Unchecked)
    : grid_(grid), values_(std::move(values)) {}

ScalarField ScalarField::constant(const TorusGrid& grid, double c) {
  return ScalarField(grid, std::vector<double>(grid.size(), c));
}

ScalarField ScalarField::sample(const TorusGrid& grid,
                                const std::function<double(double, double, double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t idx = 0; idx < v.size(); ++idx) {
    const auto x = grid.node(idx);
    v[idx] = f(x[0], x[1], x[2]);
  }
  return ScalarField(grid, std::move(v));
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::mean() const {
  return static_cast<double>(std::accumulate(values_.begin(), values_.end(), 0.0L) /
                             static_cast<long double>(values_.size()));
}

ScalarField ScalarField::map(const std::function<double(double)>& fn) const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), fn);
  return ScalarField(grid_, std::move(v));
}

ScalarField ScalarField::shifted(const std::array<int, 3>& shift) const {
  const int n = grid_.n();
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  std::vector<double> v(values_.size());
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        v[grid_.index(i, j, k)] =
            values_[grid_.index(wrap(i - shift[0]), wrap(j - shift[1]), wrap(k - shift[2]))];
      }
    }
  }
  return ScalarField(grid_, std::move(v), Unchecked{});
}

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw ParameterError("fields live on different grids");
}

template <class Op>
std::vector<double> zip(const ScalarField& a, const ScalarField& b, Op op) {
  require_same_grid(a, b);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a[i], b[i]);
  return v;
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return ScalarField(a.grid(), zip(a, b, std::plus<>{}));
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return ScalarField(a.grid(), zip(a, b, std::minus<>{}));
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return ScalarField(a.grid(), zip(a, b, std::multiplies<>{}));
}
ScalarField operator*(double c, const ScalarField& f) {
  return f.map([c](double v) { return c * v; });
}

// --- Spectrum and transforms -----------------------------------------------

Spectrum::Spectrum(const TorusGrid& grid)
    : grid_(grid),
      coeffs_(static_cast<std::size_t>(grid.n()) * grid.n() * (grid.n() / 2 + 1)) {}

Spectrum forward(const ScalarField& f) {
  Spectrum s(f.grid());
  auto c = s.coefficients();
  detail::fft_r2c(f.grid().n(), f.values().data(), c.data());
  const double scale = 1.0 / static_cast<double>(f.grid().size());
  for (auto& z : c) z *= scale;
  return s;
}

ScalarField inverse(const Spectrum& s) {
  std::vector<double> v(s.grid().size());
  detail::fft_c2r(s.grid().n(), s.coefficients().data(), v.data());
  return ScalarField(s.grid(), std::move(v));
}

// --- Multiplier -------------------------------------------------------------

namespace {

int max_shell(const TorusGrid& g) { return 3 * (g.n() / 2) * (g.n() / 2); }

}  // namespace

Multiplier::Multiplier(const TorusGrid& grid, const Symbol& symbol) : grid_(grid) {
  const double k0sq = grid.k0() * grid.k0();
  table_.resize(static_cast<std::size_t>(max_shell(grid)) + 1);
  for (std::size_t q = 0; q < table_.size(); ++q) {
    const double s = k0sq * static_cast<double>(q);
    const double v = symbol(s);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "Multiplier: symbol is not finite at |k|^2 = " << s;
      throw ParameterError(msg.str());
    }
    table_[q] = v;
  }
}

Multiplier::Multiplier(TorusGrid grid, std::vector<double> table)
    : grid_(grid), table_(std::move(table)) {}

Multiplier Multiplier::reciprocal() const {
  std::vector<double> t(table_.size());
  for (std::size_t q = 0; q < t.size(); ++q) {
    if (table_[q] == 0.0) throw ParameterError("Multiplier: reciprocal of a zero symbol");
    t[q] = 1.0 / table_[q];
  }
  return Multiplier(grid_, std::move(t));
}

void apply_in_place(Spectrum& s, const Multiplier& m) {
  if (!(s.grid() == m.grid())) throw ParameterError("multiplier built for another grid");
  auto c = s.coefficients();
  s.for_each_mode([&](std::size_t idx, int mx, int my, int mz, double) {
    c[idx] *= m.at_shell(mx * mx + my * my + mz * mz);
  });
}

ScalarField apply_multiplier(const ScalarField& f, const Multiplier& m) {
  Spectrum s = forward(f);
  apply_in_place(s, m);
  return inverse(s);
}

double spectral_energy(const Spectrum& s, const Multiplier& weight) {
  const auto c = s.coefficients();
  long double sum = 0.0L;
  s.for_each_mode([&](std::size_t idx, int mx, int my, int mz, double w) {
    sum += w * weight.at_shell(mx * mx + my * my + mz * mz) * std::norm(c[idx]);
  });
  return s.grid().volume() * static_cast<double>(sum);
}

double spectral_inner(const Spectrum& a, const Spectrum& b, const Multiplier& weight) {
  if (!(a.grid() == b.grid())) throw ParameterError("spectra live on different grids");
  const auto ca = a.coefficients();
  const auto cb = b.coefficients();
  long double sum = 0.0L;
  a.for_each_mode([&](std::size_t idx, int mx, int my, int mz, double w) {
    sum += w * weight.at_shell(mx * mx + my * my + mz * mz) *
           (ca[idx].real() * cb[idx].real() + ca[idx].imag() * cb[idx].imag());
  });
  return a.grid().volume() * static_cast<double>(sum);
}

ScalarField laplacian(const ScalarField& f) {
  return apply_multiplier(f, Multiplier(f.grid(), [](double s) { return -s; }));
}

std::array<ScalarField, 3> gradient(const ScalarField& f) {
  const Spectrum s = forward(f);
  const int n = f.grid().n();
  const double k0 = f.grid().k0();
  auto component = [&](int axis) {
    Spectrum d(f.grid());
    auto out = d.coefficients();
    const auto in = s.coefficients();
    s.for_each_mode([&](std::size_t idx, int mx, int my, int mz, double) {
      const int m = axis == 0 ? mx : (axis == 1 ? my : mz);
      if (m == n / 2 || m == -n / 2) {
        out[idx] = 0.0;
      } else {
        out[idx] = std::complex<double>(0.0, k0 * m) * in[idx];
      }
    });
    return inverse(d);
  };
  return {component(0), component(1), component(2)};
}

// --- Quadrature and norms -----------------------------------------------------

double integrate(const ScalarField& f) {
  const auto v = f.values();
  // Extended accumulation keeps energy differences meaningful near round-off.
  return f.grid().cell_volume() * static_cast<double>(std::accumulate(v.begin(), v.end(), 0.0L));
}

double grad_norm_sq(const ScalarField& f) {
  return spectral_energy(forward(f), Multiplier(f.grid(), [](double s) { return s; }));
}

namespace {

void require_positive_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ParameterError("epsilon must be positive and finite");
  }
}

Multiplier eps_weight(const TorusGrid& grid, double eps) {
  const double e1 = 1.0 / eps;
  const double e3 = 1.0 / (eps * eps * eps);
  return Multiplier(grid, [=](double s) { return e1 * s + e3; });
}

}  // namespace

double norm_eps_sq(const ScalarField& f, double eps) {
  require_positive_eps(eps);
  return spectral_energy(forward(f), eps_weight(f.grid(), eps));
}

double inner_eps(const ScalarField& f, const ScalarField& g, double eps) {
  require_positive_eps(eps);
  require_same_grid(f, g);
  return spectral_inner(forward(f), forward(g), eps_weight(f.grid(), eps));
}

double lp_norm_eps(const ScalarField& f, double p, double eps) {
  require_positive_eps(eps);
  if (!(p >= 1.0)) throw ParameterError("lp_norm_eps: p must be >= 1");
  long double sum = 0.0L;
  for (double v : f.values()) sum += std::pow(std::abs(v), p);
  const double integral = f.grid().cell_volume() * static_cast<double>(sum);
  return std::pow(integral / (eps * eps * eps), 1.0 / p);
}

ScalarField positive_part(const ScalarField& f) {
  return f.map([](double v) { return v > 0.0 ? v : 0.0; });
}

// --- Resampling and nonlinear terms --------------------------------------------

ScalarField upsample(const ScalarField& f, int m, bool drop_nyquist) {
  const int n = f.grid().n();
  if (m < n) throw ParameterError("upsample: target grid is coarser");
  const TorusGrid fine(m, f.grid().length());
  const Spectrum base = forward(f);
  Spectrum padded(fine);
  const auto in = base.coefficients();
  auto out = padded.coefficients();
  const int hm = padded.half_n();
  auto wrap_m = [m](int k) { return k < 0 ? k + m : k; };

  base.for_each_mode([&](std::size_t idx, int mx, int my, int mz, double) {
    const bool nyq_x = (mx == n / 2);
    const bool nyq_y = (my == -n / 2);
    const bool nyq_z = (mz == -n / 2);
    if (drop_nyquist && (nyq_x || nyq_y || nyq_z)) return;
    // A base Nyquist coefficient is shared equally between the +n/2 and -n/2
    // modes of the finer grid (the symmetric real interpolant).
    double factor = 1.0;
    int ny_targets[2] = {my, my};
    int nz_targets[2] = {mz, mz};
    int ny_count = 1, nz_count = 1;
    if (nyq_x) factor *= 0.5;
    if (nyq_y && m > n) {
      factor *= 0.5;
      ny_targets[1] = n / 2;
      ny_count = 2;
    }
    if (nyq_z && m > n) {
      factor *= 0.5;
      nz_targets[1] = n / 2;
      nz_count = 2;
    }
    if (nyq_x && m == n) factor *= 2.0;
    for (int a = 0; a < ny_count; ++a) {
      for (int b = 0; b < nz_count; ++b) {
        const std::size_t t = static_cast<std::size_t>(mx) +
                              static_cast<std::size_t>(hm) *
                                  (static_cast<std::size_t>(wrap_m(ny_targets[a])) +
                                   static_cast<std::size_t>(m) * wrap_m(nz_targets[b]));
        out[t] += factor * in[idx];
      }
    }
  });
  return inverse(padded);
}

ScalarField truncate(const ScalarField& f, int n) {
  const int m = f.grid().n();
  if (n > m) throw ParameterError("truncate: target grid is finer");
  const TorusGrid coarse(n, f.grid().length());
  const Spectrum fine = forward(f);
  Spectrum out(coarse);
  const auto in = fine.coefficients();
  auto c = out.coefficients();
  const int hm = fine.half_n();
  out.for_each_mode([&](std::size_t idx, int mx, int my, int mz, double) {
    if (mx == n / 2 || my == -n / 2 || mz == -n / 2) return;
    const std::size_t src = static_cast<std::size_t>(mx) +
                            static_cast<std::size_t>(hm) *
                                (static_cast<std::size_t>(my < 0 ? my + m : my) +
                                 static_cast<std::size_t>(m) * (mz < 0 ? mz + m : mz));
    c[idx] = in[src];
  });
  return inverse(out);
}

namespace {

int padded_size(const TorusGrid& g) {
  if (g.n() % 4 != 0) {
    throw ParameterError("3/2-rule dealiasing needs n divisible by 4");
  }
  return 3 * g.n() / 2;
}

}  // namespace

ScalarField nonlinear_map(const ScalarField& f, const std::function<double(double)>& fn,
                          Dealiasing mode) {
  if (mode == Dealiasing::none) return f.map(fn);
  const ScalarField fine = upsample(f, padded_size(f.grid()), true);
  return truncate(fine.map(fn), f.grid().n());
}

ScalarField nonlinear_product(const ScalarField& a, const ScalarField& b,
                              Dealiasing mode) {
  require_same_grid(a, b);
  if (mode == Dealiasing::none) return a * b;
  const int m = padded_size(a.grid());
  return truncate(upsample(a, m, true) * upsample(b, m, true), a.grid().n());
}

double integrate_nonlinear(const ScalarField& f, const std::function<double(double)>& fn,
                           Dealiasing mode) {
  if (mode == Dealiasing::none) return integrate(f.map(fn));
  return integrate(upsample(f, padded_size(f.grid()), true).map(fn));
}

// --- Binary field dump ------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'B', 'P', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <class T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw ParameterError("field dump: truncated stream");
  }
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_field_dump(std::ostream& out, const ScalarField& f, double epsilon) {
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid().n()));
  put_le<double>(out, f.grid().length());
  put_le<double>(out, epsilon);
  for (double v : f.values()) put_le<double>(out, v);
  if (!out) throw NumericalError("field dump: write failed");
}

void write_field_dump(const std::string& path, const ScalarField& f, double epsilon) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open " + path + " for writing");
  write_field_dump(out, f, epsilon);
}

FieldDump read_field_dump(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw ParameterError("field dump: bad magic");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) {
    throw ParameterError("field dump: unsupported version " + std::to_string(version));
  }
  const auto n = get_le<std::uint32_t>(in);
  const double length = get_le<double>(in);
  const double epsilon = get_le<double>(in);
  const TorusGrid grid(static_cast<int>(n), length);
  std::vector<double> values(grid.size());
  for (auto& v : values) v = get_le<double>(in);
  return {ScalarField(grid, std::move(values)), epsilon};
}

FieldDump read_field_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open " + path);
  return read_field_dump(in);
}

}  // namespace sbpp
