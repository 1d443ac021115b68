#include "shearmix/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "shearmix/parallel.hpp"

namespace shearmix {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW planning is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void check_grid_size(int n) {
  if (n < 4 || !std::has_single_bit(static_cast<unsigned>(n))) {
    throw std::invalid_argument("grid size must be a power of two >= 4");
  }
}

}  // namespace

// ---------------------------------------------------------------- ScalarField

ScalarField::ScalarField(int n, double fill) : n_(n) {
  check_grid_size(n);
  values_.assign(static_cast<std::size_t>(n) * n, fill);
}

ScalarField::ScalarField(int n, std::vector<double> values) : n_(n), values_(std::move(values)) {
  check_grid_size(n);
  if (values_.size() != static_cast<std::size_t>(n) * n) {
    throw std::invalid_argument("ScalarField: value count does not match n * n");
  }
}

ScalarField ScalarField::from_function(int n, const std::function<double(double, double)>& fn) {
  ScalarField f(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      f.at(i, j) = fn(static_cast<double>(i) / n, static_cast<double>(j) / n);
    }
  }
  return f;
}

double ScalarField::mean() const noexcept {
  // Row sums first keeps the accumulation error at O(n eps) per row.
  double total = 0.0;
  for (int j = 0; j < n_; ++j) {
    const auto row = values().subspan(static_cast<std::size_t>(j) * n_, n_);
    total += std::accumulate(row.begin(), row.end(), 0.0);
  }
  return total / (static_cast<double>(n_) * n_);
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void NormSeries::push(const NormEntry& e) {
  times.push_back(e.t);
  l1.push_back(e.l1);
  l2.push_back(e.l2);
  linf.push_back(e.linf);
  sobolev.push_back(e.sobolev.empty() ? 0.0 : e.sobolev.front());
}

// --------------------------------------------------------------- SpectralGrid

struct SpectralGrid::Plans {
  int n = 0;
  int half = 0;  // n / 2 + 1
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan r2c_2d = nullptr, c2r_2d = nullptr;
  fftw_plan r2c_rows = nullptr, c2r_rows = nullptr;
  fftw_plan r2c_cols = nullptr, c2r_cols = nullptr;

  explicit Plans(int size) : n(size), half(size / 2 + 1) {
    std::lock_guard lock(planner_mutex());
    real = fftw_alloc_real(static_cast<std::size_t>(n) * n);
    spec = fftw_alloc_complex(static_cast<std::size_t>(n) * half);
    const unsigned flags = FFTW_ESTIMATE;
    r2c_2d = fftw_plan_dft_r2c_2d(n, n, real, spec, flags);
    c2r_2d = fftw_plan_dft_c2r_2d(n, n, spec, real, flags);
    int len[1] = {n};
    // Rows: contiguous lines along x1; spectra stored [j][k].
    r2c_rows = fftw_plan_many_dft_r2c(1, len, n, real, nullptr, 1, n, spec, nullptr, 1, half, flags);
    c2r_rows = fftw_plan_many_dft_c2r(1, len, n, spec, nullptr, 1, half, real, nullptr, 1, n, flags);
    // Columns: strided lines along x2; spectra stored [k][i].
    r2c_cols = fftw_plan_many_dft_r2c(1, len, n, real, nullptr, n, 1, spec, nullptr, n, 1, flags);
    c2r_cols = fftw_plan_many_dft_c2r(1, len, n, spec, nullptr, n, 1, real, nullptr, n, 1, flags);
    if (!r2c_2d || !c2r_2d || !r2c_rows || !c2r_rows || !r2c_cols || !c2r_cols) {
      throw std::runtime_error("FFTW plan creation failed");
    }
  }

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    for (fftw_plan p : {r2c_2d, c2r_2d, r2c_rows, c2r_rows, r2c_cols, c2r_cols}) {
      if (p) fftw_destroy_plan(p);
    }
    fftw_free(real);
    fftw_free(spec);
  }

  void load(const ScalarField& f) { std::copy(f.values().begin(), f.values().end(), real); }
  void store(ScalarField& f, double scale) const {
    auto out = f.values();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = real[k] * scale;
  }
};

SpectralGrid::SpectralGrid(int n) : n_(n) {
  check_grid_size(n);
  plans_ = std::make_unique<Plans>(n);
}

SpectralGrid::~SpectralGrid() = default;

void SpectralGrid::translate_lines(ScalarField& f, Axis axis, const std::vector<double>& shift) {
  auto& p = *plans_;
  const int n = n_;
  const int nyquist = n / 2;
  p.load(f);
  fftw_execute(axis == Axis::horizontal ? p.r2c_rows : p.r2c_cols);

  for (int line = 0; line < n; ++line) {
    const double a = shift[static_cast<std::size_t>(line)];
    if (a == 0.0) continue;
    // Mode k of the line picks up exp(-2 pi i k a). Rows store modes
    // contiguously; columns store them with stride n.
    const std::size_t base = axis == Axis::horizontal ? static_cast<std::size_t>(line) * p.half
                                                      : static_cast<std::size_t>(line);
    const std::size_t stride = axis == Axis::horizontal ? 1 : static_cast<std::size_t>(n);
    const std::complex<double> step = std::polar(1.0, -kTwoPi * a);
    std::complex<double> rot(1.0, 0.0);
    for (int k = 1; k <= nyquist; ++k) {
      // Resynchronise the rotation recurrence to bound its drift.
      rot = (k % 32 == 0) ? std::polar(1.0, -kTwoPi * a * k) : rot * step;
      fftw_complex& c = p.spec[base + static_cast<std::size_t>(k) * stride];
      if (k == nyquist) {
        // Real representation of the Nyquist mode of a real line.
        const double factor = std::cos(kPi * n * a);
        c[0] *= factor;
        c[1] *= factor;
      } else {
        const std::complex<double> v(c[0], c[1]);
        const std::complex<double> w = v * rot;
        c[0] = w.real();
        c[1] = w.imag();
      }
    }
  }

  fftw_execute(axis == Axis::horizontal ? p.c2r_rows : p.c2r_cols);
  p.store(f, 1.0 / n);
}

void SpectralGrid::diffuse(ScalarField& f, double kappa, double t) {
  if (kappa == 0.0 || t == 0.0) return;
  auto& p = *plans_;
  const int n = n_;
  std::vector<double> damp(static_cast<std::size_t>(n));
  for (int idx = 0; idx < n; ++idx) {
    const double k = wavenumber(idx, n);
    damp[static_cast<std::size_t>(idx)] = std::exp(-4.0 * kPi * kPi * kappa * t * k * k);
  }
  p.load(f);
  fftw_execute(p.r2c_2d);
  for (int j = 0; j < n; ++j) {
    const double dj = damp[static_cast<std::size_t>(j)];
    for (int i = 0; i < p.half; ++i) {
      const double factor = dj * damp[static_cast<std::size_t>(i)];
      fftw_complex& c = p.spec[static_cast<std::size_t>(j) * p.half + i];
      c[0] *= factor;
      c[1] *= factor;
    }
  }
  fftw_execute(p.c2r_2d);
  p.store(f, 1.0 / (static_cast<double>(n) * n));
}

std::vector<std::complex<double>> SpectralGrid::forward(const ScalarField& f) {
  auto& p = *plans_;
  p.load(f);
  fftw_execute(p.r2c_2d);
  const double scale = 1.0 / (static_cast<double>(n_) * n_);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n_) * p.half);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = {p.spec[k][0] * scale, p.spec[k][1] * scale};
  }
  return out;
}

ScalarField SpectralGrid::inverse(std::span<const std::complex<double>> coeffs) {
  auto& p = *plans_;
  if (coeffs.size() != static_cast<std::size_t>(n_) * p.half) {
    throw std::invalid_argument("SpectralGrid::inverse: coefficient count mismatch");
  }
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    p.spec[k][0] = coeffs[k].real();
    p.spec[k][1] = coeffs[k].imag();
  }
  fftw_execute(p.c2r_2d);
  ScalarField f(n_);
  p.store(f, 1.0);
  return f;
}

SpectralGrid& spectral_grid(int n) {
  thread_local std::map<int, std::unique_ptr<SpectralGrid>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<SpectralGrid>(n);
  return *slot;
}

// ----------------------------------------------------------- free operations

namespace {

std::vector<double> line_shifts(int n, double zeta, double amplitude, Profile profile) {
  std::vector<double> shift(static_cast<std::size_t>(n));
  for (int line = 0; line < n; ++line) {
    shift[static_cast<std::size_t>(line)] =
        amplitude * profile_value(profile, static_cast<double>(line) / n - zeta);
  }
  return shift;
}

// Weight of half-spectrum column k1 in full-spectrum sums.
double half_weight(int k1, int n) noexcept { return (k1 == 0 || k1 == n / 2) ? 1.0 : 2.0; }

}  // namespace

ScalarField advect_shear_exact(const ScalarField& f, double zeta, Axis axis, double amplitude,
                               Profile profile) {
  ScalarField out = f;
  if (amplitude == 0.0) return out;
  spectral_grid(f.n()).translate_lines(out, axis, line_shifts(f.n(), zeta, amplitude, profile));
  return out;
}

ScalarField diffuse_exact(const ScalarField& f, double kappa, double t) {
  if (!(kappa >= 0.0) || !(t >= 0.0)) {
    throw std::invalid_argument("diffuse_exact: kappa and t must be >= 0");
  }
  ScalarField out = f;
  spectral_grid(f.n()).diffuse(out, kappa, t);
  return out;
}

ScalarField unit_step(const ScalarField& f, double zeta, Axis axis, double kappa,
                      double amplitude, Profile profile, int split_substeps, SplitScheme scheme) {
  if (split_substeps < 1) throw std::invalid_argument("split_substeps must be >= 1");
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  SpectralGrid& grid = spectral_grid(f.n());
  ScalarField out = f;
  if (scheme == SplitScheme::pulsed) {
    if (amplitude != 0.0) {
      grid.translate_lines(out, axis, line_shifts(f.n(), zeta, amplitude, profile));
    }
    // A heat kick of variance kappa is the heat flow for time 1/2.
    grid.diffuse(out, kappa, 0.5);
    return out;
  }

  const double h = 1.0 / split_substeps;
  const std::vector<double> shift = line_shifts(f.n(), zeta, amplitude * h, profile);
  grid.diffuse(out, kappa, 0.5 * h);
  for (int s = 0; s < split_substeps; ++s) {
    if (amplitude != 0.0) grid.translate_lines(out, axis, shift);
    // Adjacent half steps merge into one full step.
    grid.diffuse(out, kappa, s + 1 < split_substeps ? h : 0.5 * h);
  }
  return out;
}

ScalarField period_step(const ScalarField& f, double zeta_even, double zeta_odd, double kappa,
                        double amplitude, Profile profile, int split_substeps,
                        SplitScheme scheme) {
  const ScalarField h =
      unit_step(f, zeta_even, Axis::horizontal, kappa, amplitude, profile, split_substeps, scheme);
  return unit_step(h, zeta_odd, Axis::vertical, kappa, amplitude, profile, split_substeps, scheme);
}

NormEntry norms(const ScalarField& f, std::span<const double> orders) {
  NormEntry e;
  const double m = f.mean();
  double l1 = 0.0, l2 = 0.0, linf = 0.0;
  for (double v : f.values()) {
    const double d = std::abs(v - m);
    l1 += d;
    l2 += d * d;
    linf = std::max(linf, d);
  }
  const double cells = static_cast<double>(f.size());
  e.l1 = l1 / cells;
  e.l2 = std::sqrt(l2 / cells);
  e.linf = linf;
  if (orders.empty()) return e;

  const int n = f.n();
  const int half = n / 2 + 1;
  const auto coeffs = spectral_grid(n).forward(f);
  std::vector<double> sums(orders.size(), 0.0);
  for (int j = 0; j < n; ++j) {
    const double k2 = wavenumber(j, n);
    for (int i = 0; i < half; ++i) {
      if (i == 0 && j == 0) continue;
      const double k_sq = static_cast<double>(i) * i + k2 * k2;
      const double power =
          half_weight(i, n) * std::norm(coeffs[static_cast<std::size_t>(j) * half + i]);
      const double base = 1.0 + 4.0 * kPi * kPi * k_sq;
      for (std::size_t o = 0; o < orders.size(); ++o) {
        sums[o] += power * std::pow(base, orders[o]);
      }
    }
  }
  e.sobolev.reserve(orders.size());
  for (double s : sums) e.sobolev.push_back(std::sqrt(s));
  return e;
}

double sobolev_norm(const ScalarField& f, double order) {
  const double orders[1] = {order};
  return norms(f, orders).sobolev.front();
}

double inner_product_grid(const ScalarField& f, const ScalarField& g) {
  if (f.n() != g.n()) throw std::invalid_argument("inner_product_grid: grid mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) total += f.values()[k] * g.values()[k];
  return total / static_cast<double>(f.size());
}

double inner_product_spectral(const ScalarField& f, const ScalarField& g) {
  if (f.n() != g.n()) throw std::invalid_argument("inner_product_spectral: grid mismatch");
  const int n = f.n();
  const int half = n / 2 + 1;
  auto& grid = spectral_grid(n);
  const auto fc = grid.forward(f);
  const auto gc = grid.forward(g);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < half; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * half + i;
      total += half_weight(i, n) * (fc[k] * std::conj(gc[k])).real();
    }
  }
  return total;
}

ScalarField gaussian_bump(int n, const TorusPoint& center, double sigma) {
  check_grid_size(n);
  const int half = n / 2 + 1;
  std::vector<std::complex<double>> coeffs(static_cast<std::size_t>(n) * half);
  for (int j = 0; j < n; ++j) {
    const double k2 = wavenumber(j, n);
    for (int i = 0; i < half; ++i) {
      const double k1 = i;
      const double amp = std::exp(-2.0 * kPi * kPi * sigma * sigma * (k1 * k1 + k2 * k2));
      // On a Nyquist line the modes +n/2 and -n/2 alias; their average keeps
      // the coefficient array Hermitian.
      const std::complex<double> e1 = i == n / 2 ? std::complex<double>(std::cos(kPi * n * center.x1))
                                                 : std::polar(1.0, -kTwoPi * k1 * center.x1);
      const std::complex<double> e2 = j == n / 2 ? std::complex<double>(std::cos(kPi * n * center.x2))
                                                 : std::polar(1.0, -kTwoPi * k2 * center.x2);
      coeffs[static_cast<std::size_t>(j) * half + i] = amp * e1 * e2;
    }
  }
  return spectral_grid(n).inverse(coeffs);
}

int required_grid_size(double kappa, double amplitude) {
  if (kappa <= 0.0) return 256;
  const double need = 4.0 * (std::abs(amplitude) + 1.0) / std::sqrt(kappa);
  int n = 4;
  while (n < need) n *= 2;
  return n;
}

bool is_resolved(int n, double kappa, double amplitude) {
  if (kappa <= 0.0) return n >= 256;
  return n >= 4.0 * (std::abs(amplitude) + 1.0) / std::sqrt(kappa);
}

double surrogate_width(int n, double kappa) {
  return std::max(2.0 / n, std::sqrt(std::max(kappa, 0.0)));
}

DecayRun decay_run(const ScalarField& rho0, const ShearSchedule& schedule, double kappa,
                   int n_periods, int split_substeps, double sobolev_order, SplitScheme scheme) {
  if (n_periods < 1) throw std::invalid_argument("decay_run: n_periods must be >= 1");
  DecayRun run;
  run.underresolved = !is_resolved(rho0.n(), kappa, schedule.amplitude);
  run.series.sobolev_order = sobolev_order;
  const double orders[1] = {sobolev_order};
  ScalarField rho = rho0;
  NormEntry e = norms(rho, orders);
  e.t = 0.0;
  run.series.push(e);
  for (int p = 0; p < n_periods; ++p) {
    const auto [ze, zo] = schedule.period_shifts(static_cast<std::uint64_t>(p));
    rho = period_step(rho, ze, zo, kappa, schedule.amplitude, schedule.profile, split_substeps,
                      scheme);
    e = norms(rho, orders);
    e.t = 2.0 * (p + 1);
    run.series.push(e);
  }
  return run;
}

MixingTimeResult mixing_time(double kappa, const ShearSchedule& schedule, double epsilon,
                             double delta_width, int n_max, const MixingOptions& options) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("mixing_time: epsilon must be > 0");
  if (n_max < 1) throw std::invalid_argument("mixing_time: n_max must be >= 1");
  const int n = options.grid_size;
  check_grid_size(n);
  const double sigma = delta_width > 0.0 ? delta_width : surrogate_width(n, kappa);

  // A pure heat flow is translation invariant, so one source stands for all.
  const int per_axis = schedule.amplitude == 0.0 ? 1 : std::max(1, options.sources_per_axis);
  std::vector<ScalarField> fields;
  for (int b = 0; b < per_axis; ++b) {
    for (int a = 0; a < per_axis; ++a) {
      const TorusPoint c{(a + 0.5) / per_axis, (b + 0.5) / per_axis};
      fields.push_back(gaussian_bump(n, c, sigma));
    }
  }

  MixingTimeResult result;
  result.underresolved = !is_resolved(n, kappa, schedule.amplitude);
  auto sup_gap = [&] {
    double gap = 0.0;
    for (const auto& f : fields) {
      for (double v : f.values()) gap = std::max(gap, std::abs(v - 1.0));
    }
    return gap;
  };
  result.sup_density_gap.push_back(sup_gap());
  for (int p = 0; p < n_max; ++p) {
    const auto [ze, zo] = schedule.period_shifts(static_cast<std::uint64_t>(p));
    parallel_for(fields.size(), [&](std::size_t s) {
      fields[s] = period_step(fields[s], ze, zo, kappa, schedule.amplitude, schedule.profile,
                              options.split_substeps, options.scheme);
    });
    const double gap = sup_gap();
    result.sup_density_gap.push_back(gap);
    if (gap < epsilon) {
      result.t_mix = p + 1;
      break;
    }
  }
  return result;
}

}  // namespace shearmix
