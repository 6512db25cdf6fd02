#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sbpp {

using TorusPoint = std::array<double, 3>;

/// Uniform n x n x n sampling of the flat torus [0, L)^3.
///
/// Nodes sit at x = h * (i, j, k) with h = L / n. Linear storage is x-fastest:
/// index = i + n * (j + n * k). Wavevectors are (2 pi / L) * m with integer
/// m in [-n/2, n/2) per axis.
class TorusGrid {
 public:
  TorusGrid(int n_per_axis, double period_length);

  int n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / n_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n_) * n_ * n_;
  }
  double volume() const noexcept { return length_ * length_ * length_; }
  double cell_volume() const noexcept {
    const double h = spacing();
    return h * h * h;
  }
  /// 2 pi / L, the fundamental wavenumber.
  double k0() const noexcept;

  std::size_t index(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(n_) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(n_) * k);
  }
  std::array<int, 3> multi_index(std::size_t idx) const noexcept;
  TorusPoint node(std::size_t idx) const noexcept;

  /// Signed separation b - a folded into [-L/2, L/2).
  double periodic_delta(double a, double b) const noexcept;
  double distance(const TorusPoint& a, const TorusPoint& b) const noexcept;
  TorusPoint wrap(const TorusPoint& x) const noexcept;

  bool operator==(const TorusGrid& other) const noexcept = default;

 private:
  int n_;
  double length_;
};

/// Real field sampled on a TorusGrid. Values are immutable after construction;
/// every operation returns a new field.
class ScalarField {
 public:
  ScalarField(TorusGrid grid, std::vector<double> values);

  static ScalarField constant(const TorusGrid& grid, double c);
  static ScalarField sample(const TorusGrid& grid,
                            const std::function<double(double, double, double)>& f);

  const TorusGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t idx) const noexcept { return values_[idx]; }
  std::size_t size() const noexcept { return values_.size(); }

  double max() const;
  double min() const;
  double mean() const;

  ScalarField map(const std::function<double(double)>& fn) const;
  /// Cyclic shift by whole grid cells: result(x) = this(x - shift * h).
  ScalarField shifted(const std::array<int, 3>& shift) const;

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  /// Pointwise product on the grid (no dealiasing).
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double c, const ScalarField& f);
  friend ScalarField operator*(const ScalarField& f, double c) { return c * f; }

 private:
  struct Unchecked {};
  ScalarField(TorusGrid grid, std::vector<double> values, Unchecked);

  TorusGrid grid_;
  std::vector<double> values_;
};

/// Half-complex spectrum of a real field, normalized so that
/// f(x) = sum_k fhat(k) exp(i k.x). The forward transform carries 1/n^3.
///
/// Layout follows the real-to-complex convention: x is the halved axis,
/// index = mx + (n/2 + 1) * (jy + n * jz) with mx in [0, n/2].
class Spectrum {
 public:
  explicit Spectrum(const TorusGrid& grid);

  const TorusGrid& grid() const noexcept { return grid_; }
  int half_n() const noexcept { return grid_.n() / 2 + 1; }
  std::span<std::complex<double>> coefficients() noexcept { return coeffs_; }
  std::span<const std::complex<double>> coefficients() const noexcept {
    return coeffs_;
  }

  /// Calls fn(idx, mx, my, mz, weight) for every stored mode; (my, mz) are
  /// signed and weight counts the mode's conjugate partner (1 or 2), so a
  /// weighted sum over stored modes equals the full-spectrum sum.
  template <class Fn>
  void for_each_mode(Fn&& fn) const {
    const int n = grid_.n();
    const int hn = half_n();
    std::size_t idx = 0;
    for (int jz = 0; jz < n; ++jz) {
      const int mz = jz < n / 2 ? jz : jz - n;
      for (int jy = 0; jy < n; ++jy) {
        const int my = jy < n / 2 ? jy : jy - n;
        for (int mx = 0; mx < hn; ++mx, ++idx) {
          const double weight = (mx == 0 || mx == n / 2) ? 1.0 : 2.0;
          fn(idx, mx, my, mz, weight);
        }
      }
    }
  }

 private:
  TorusGrid grid_;
  std::vector<std::complex<double>> coeffs_;
};

Spectrum forward(const ScalarField& f);
ScalarField inverse(const Spectrum& s);

/// Isotropic Fourier symbol m(|k|^2) tabulated on the attainable shells
/// |k|^2 = k0^2 * q of one grid, q = mx^2 + my^2 + mz^2.
class Multiplier {
 public:
  using Symbol = std::function<double(double)>;

  /// Throws ParameterError if the symbol is not finite on some shell.
  Multiplier(const TorusGrid& grid, const Symbol& symbol);

  const TorusGrid& grid() const noexcept { return grid_; }
  double at_shell(int q) const noexcept { return table_[static_cast<std::size_t>(q)]; }
  Multiplier reciprocal() const;

 private:
  Multiplier(TorusGrid grid, std::vector<double> table);
  TorusGrid grid_;
  std::vector<double> table_;
};

void apply_in_place(Spectrum& s, const Multiplier& m);
ScalarField apply_multiplier(const ScalarField& f, const Multiplier& m);

/// vol * sum_k w(|k|^2) |fhat(k)|^2 over the full spectrum.
double spectral_energy(const Spectrum& s, const Multiplier& weight);
/// vol * sum_k w(|k|^2) Re(ahat(k) conj(bhat(k))).
double spectral_inner(const Spectrum& a, const Spectrum& b, const Multiplier& weight);

ScalarField laplacian(const ScalarField& f);
/// Spectral gradient; the Nyquist mode of each odd derivative is zeroed.
std::array<ScalarField, 3> gradient(const ScalarField& f);

// --- Quadrature and norms -------------------------------------------------

double integrate(const ScalarField& f);
/// int |grad f|^2 via Parseval.
double grad_norm_sq(const ScalarField& f);
/// ||f||_eps^2 = (1/eps) int |grad f|^2 + (1/eps^3) int f^2.
double norm_eps_sq(const ScalarField& f, double eps);
/// <f, g>_eps, the bilinear form of norm_eps_sq.
double inner_eps(const ScalarField& f, const ScalarField& g, double eps);
/// |f|_{p,eps} = ((1/eps^3) int |f|^p)^(1/p).
double lp_norm_eps(const ScalarField& f, double p, double eps);
ScalarField positive_part(const ScalarField& f);

// --- Nonlinear terms --------------------------------------------------------

/// How pointwise nonlinearities are evaluated. `three_halves` samples the
/// spectral interpolant on a 3n/2 grid, applies the nonlinearity there and
/// truncates back (requires n divisible by 4). The base Nyquist planes are
/// dropped in that mode so that interpolation and truncation are adjoint.
enum class Dealiasing { none, three_halves };

ScalarField nonlinear_map(const ScalarField& f, const std::function<double(double)>& fn,
                          Dealiasing mode);
ScalarField nonlinear_product(const ScalarField& a, const ScalarField& b,
                              Dealiasing mode);
/// int fn(f) with the same sampling as nonlinear_map.
double integrate_nonlinear(const ScalarField& f, const std::function<double(double)>& fn,
                           Dealiasing mode);

/// Spectral interpolation onto a finer grid of the same period (m >= n).
ScalarField upsample(const ScalarField& f, int m, bool drop_nyquist);
/// Keeps the modes representable on the n grid except its Nyquist planes.
ScalarField truncate(const ScalarField& f, int n);

// --- Binary field dump ------------------------------------------------------

/// "SBPF" | u32 version=1 | u32 n | f64 L | f64 epsilon | n^3 f64, all
/// little-endian, values x-fastest.
struct FieldDump {
  ScalarField field;
  double epsilon;
};

void write_field_dump(std::ostream& out, const ScalarField& f, double epsilon);
void write_field_dump(const std::string& path, const ScalarField& f, double epsilon);
FieldDump read_field_dump(std::istream& in);
FieldDump read_field_dump(const std::string& path);

}  // namespace sbpp
