#include "cmp/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "cmp/errors.hpp"

namespace cmp {

double kittel_frequency(double bias_field, double field_offset,
                        const PhysicalConstants& consts) {
    if (bias_field < 0.0)
        throw ConfigError("kittel_frequency: negative bias field");
    return consts.gyromagnetic_ratio * bias_field + field_offset;
}

void HybridSystemModel::set_bias_field(double b0) {
    if (b0 < 0.0) throw ConfigError("HybridSystemModel: negative bias field");
    bias_field = b0;
    for (auto& m : modes)
        if (m.kind == ModeKind::magnon)
            m.omega = kittel_frequency(bias_field, m.field_offset, constants);
}

void HybridSystemModel::validate() const {
    const auto n = static_cast<Eigen::Index>(modes.size());
    if (n == 0) throw ConfigError("model: no modes");
    if (couplings.rows() != n || couplings.cols() != n)
        throw ConfigError("model: coupling matrix does not match mode count");
    if (port_couplings.size() != modes.size())
        throw ConfigError("model: port coupling list does not match mode count");
    for (const auto& m : modes) {
        if (m.omega <= 0.0) throw ConfigError("model: mode omega must be positive");
        if (m.gamma < 0.0) throw ConfigError("model: negative damping rate");
        if (m.kind == ModeKind::magnon) {
            const double expected = kittel_frequency(bias_field, m.field_offset, constants);
            if (std::abs(m.omega - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
                throw ConfigError("model: magnon omega out of sync with bias field");
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (couplings(i, i) != 0.0)
            throw ConfigError("model: coupling matrix diagonal must be zero");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (couplings(i, j) < 0.0)
                throw ConfigError("model: negative coupling");
            if (couplings(i, j) != couplings(j, i))
                throw ConfigError("model: coupling matrix not symmetric");
        }
    }
    for (double k : port_couplings)
        if (k < 0.0) throw ConfigError("model: negative port coupling");
    if (input_port < 0 || input_port >= n || output_port < 0 || output_port >= n)
        throw ConfigError("model: port index out of range");
}

bool HybridSystemModel::strong_coupling(int i, int j) const {
    const double g = couplings(i, j);
    return g > std::max(modes[i].gamma, modes[j].gamma) / 2.0;
}

Eigen::MatrixXcd dynamical_matrix(const HybridSystemModel& model) {
    model.validate();
    const auto n = static_cast<Eigen::Index>(model.size());
    Eigen::MatrixXcd m(n, n);
    m = model.couplings.cast<std::complex<double>>();
    for (Eigen::Index j = 0; j < n; ++j)
        m(j, j) = std::complex<double>(model.modes[j].omega, -model.modes[j].gamma / 2.0);
    return m;
}

namespace {

Eigenmodes eigen_of(const Eigen::MatrixXcd& m) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, true);
    if (solver.info() != Eigen::Success)
        throw NumericError("hybrid_eigenmodes: eigensolver failed to converge");
    Eigenmodes out{solver.eigenvalues(), solver.eigenvectors()};
    // sort ascending by real part
    const auto n = out.values.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return out.values[a].real() < out.values[b].real();
    });
    Eigenmodes sorted{Eigen::VectorXcd(n), Eigen::MatrixXcd(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        sorted.values[i] = out.values[order[static_cast<std::size_t>(i)]];
        sorted.vectors.col(i) = out.vectors.col(order[static_cast<std::size_t>(i)]);
    }
    return sorted;
}

// Permutation matching columns of `cur` onto columns of `ref` by maximum
// overlap |ref_i^H cur_j|.  Returns per-ref-column index into cur, plus the
// weakest winning overlap for tracking diagnostics.
std::pair<std::vector<Eigen::Index>, double>
match_branches(const Eigen::MatrixXcd& ref, const Eigen::MatrixXcd& cur) {
    const auto n = ref.cols();
    std::vector<Eigen::Index> pick(static_cast<std::size_t>(n), -1);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    double weakest = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = -1.0;
        Eigen::Index best_j = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double ov = std::abs(ref.col(i).dot(cur.col(j))) /
                              (ref.col(i).norm() * cur.col(j).norm());
            if (ov > best) { best = ov; best_j = j; }
        }
        pick[static_cast<std::size_t>(i)] = best_j;
        used[static_cast<std::size_t>(best_j)] = true;
        weakest = std::min(weakest, best);
    }
    return {pick, weakest};
}

}  // namespace

Eigenmodes solve_eigenmodes(const HybridSystemModel& model) {
    return eigen_of(dynamical_matrix(model));
}

std::vector<std::complex<double>> hybrid_eigenmodes(const HybridSystemModel& model) {
    const Eigenmodes em = solve_eigenmodes(model);
    return {em.values.data(), em.values.data() + em.values.size()};
}

double rabi_splitting(const HybridSystemModel& model,
                      std::optional<std::pair<int, int>> branch_pair,
                      std::optional<std::pair<double, double>> field_window) {
    model.validate();
    int lo_branch = 0, hi_branch = 1;
    if (branch_pair) {
        lo_branch = branch_pair->first;
        hi_branch = branch_pair->second;
    } else if (model.size() != 2) {
        throw ConfigError("rabi_splitting: select a branch pair for N>2 models");
    }
    if (lo_branch == hi_branch || lo_branch < 0 || hi_branch >= static_cast<int>(model.size()))
        throw ConfigError("rabi_splitting: bad branch pair");

    // Locate the crossing of the first cavity mode with the first magnon mode.
    const auto cavity = std::find_if(model.modes.begin(), model.modes.end(),
                                     [](const OscillatorMode& m) { return m.kind == ModeKind::cavity; });
    const auto magnon = std::find_if(model.modes.begin(), model.modes.end(),
                                     [](const OscillatorMode& m) { return m.kind == ModeKind::magnon; });
    if (cavity == model.modes.end() || magnon == model.modes.end())
        throw ConfigError("rabi_splitting: need one cavity and one magnon mode");
    const double gyro = model.constants.gyromagnetic_ratio;
    const double crossing = (cavity->omega - magnon->field_offset) / gyro;
    if (crossing <= 0.0)
        throw NumericError("rabi_splitting: crossing field is not positive");

    const double g_max = model.couplings.maxCoeff();
    const double gamma_max = std::max_element(model.modes.begin(), model.modes.end(),
                                              [](const auto& a, const auto& b) { return a.gamma < b.gamma; })->gamma;
    const double span = std::max({5.0 * g_max, 10.0 * gamma_max, 1e-6 * cavity->omega}) / gyro;
    double b_lo = field_window ? field_window->first : std::max(crossing - span, 0.0);
    double b_hi = field_window ? field_window->second : crossing + span;

    auto separation = [&](double b0) {
        HybridSystemModel m = model;
        m.set_bias_field(b0);
        const Eigenmodes em = solve_eigenmodes(m);
        return std::abs(em.values[hi_branch].real() - em.values[lo_branch].real());
    };

    const int n_scan = 201;
    int best = 0;
    double best_sep = std::numeric_limits<double>::infinity();
    std::vector<double> grid(n_scan);
    for (int i = 0; i < n_scan; ++i) {
        grid[static_cast<std::size_t>(i)] = b_lo + (b_hi - b_lo) * i / (n_scan - 1);
        const double s = separation(grid[static_cast<std::size_t>(i)]);
        if (s < best_sep) { best_sep = s; best = i; }
    }
    if (best == 0 || best == n_scan - 1)
        throw NumericError("rabi_splitting: minimum lies on the scan boundary");

    // golden-section refinement inside the bracketing cells
    double a = grid[static_cast<std::size_t>(best - 1)];
    double b = grid[static_cast<std::size_t>(best + 1)];
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = separation(x1), f2 = separation(x2);
    for (int it = 0; it < 80 && (b - a) > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a); f1 = separation(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a); f2 = separation(x2);
        }
    }
    return std::min(f1, f2);
}

double mode_pull_coefficient(const HybridSystemModel& model, int branch,
                             double bias_field, double clip_tolerance) {
    model.validate();
    if (branch < 0 || branch >= static_cast<int>(model.size()))
        throw ConfigError("mode_pull_coefficient: branch out of range");
    const double gyro = model.constants.gyromagnetic_ratio;
    const double g_max = model.couplings.size() > 0 ? model.couplings.maxCoeff() : 0.0;
    double gamma_max = 0.0, omega_max = 0.0;
    for (const auto& m : model.modes) {
        gamma_max = std::max(gamma_max, m.gamma);
        omega_max = std::max(omega_max, m.omega);
    }
    // step adapted to the g/gamma scale of the dispersion
    const double scale = std::max({g_max, gamma_max, 1e-6 * omega_max});
    const double h = 1e-3 * scale / gyro;

    HybridSystemModel center = model;
    center.set_bias_field(bias_field);
    const Eigenmodes ref = solve_eigenmodes(center);

    auto tracked = [&](double b0) {
        HybridSystemModel m = model;
        m.set_bias_field(b0);
        const Eigenmodes em = solve_eigenmodes(m);
        auto [pick, weakest] = match_branches(ref.vectors, em.vectors);
        if (weakest < 0.8)
            throw NumericError("mode_pull_coefficient: branch tracking lost (eigenvector overlap "
                               + std::to_string(weakest) + ")");
        return em.values[pick[static_cast<std::size_t>(branch)]].real();
    };

    const double r = (tracked(bias_field + h) - tracked(bias_field - h)) / (2.0 * h * gyro);
    if (r < -clip_tolerance || r > 1.0 + clip_tolerance)
        throw NumericError("mode_pull_coefficient: r=" + std::to_string(r) + " outside [0,1]");
    return std::clamp(r, 0.0, 1.0);
}

std::complex<double> s21(const HybridSystemModel& model, double probe_omega,
                         int input_port, int output_port) {
    model.validate();
    const auto n = static_cast<Eigen::Index>(model.size());
    if (input_port < 0 || input_port >= n || output_port < 0 || output_port >= n)
        throw ConfigError("s21: port index out of range");
    // port_couplings holds each mode's total external rate; a shared
    // input/output mode splits it evenly between the two couplers
    double kin = model.port_couplings[static_cast<std::size_t>(input_port)];
    double kout = model.port_couplings[static_cast<std::size_t>(output_port)];
    if (input_port == output_port) {
        kin /= 2.0;
        kout /= 2.0;
    }
    if (kin <= 0.0 || kout <= 0.0)
        throw ConfigError("s21: chosen ports need positive couplings");
    for (const auto& m : model.modes)
        if (m.gamma <= 0.0)
            throw ConfigError("s21: transmission synthesis needs all gamma > 0");

    Eigen::MatrixXcd m = dynamical_matrix(model);
    for (Eigen::Index j = 0; j < n; ++j)
        m(j, j) -= std::complex<double>(0.0, model.port_couplings[static_cast<std::size_t>(j)] / 2.0);

    Eigen::MatrixXcd a = std::complex<double>(0.0, 1.0) *
                         (probe_omega * Eigen::MatrixXcd::Identity(n, n) - m);
    Eigen::VectorXcd e_in = Eigen::VectorXcd::Zero(n);
    e_in[input_port] = 1.0;
    const Eigen::VectorXcd x = a.partialPivLu().solve(e_in);
    return std::sqrt(kin * kout) * x[output_port];
}

std::complex<double> s21(const HybridSystemModel& model, double probe_omega) {
    return s21(model, probe_omega, model.input_port, model.output_port);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw ConfigError("linspace: need at least two points");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

unsigned grid_thread_count() {
    if (const char* env = std::getenv("CMPW_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

SpectrumMap anticrossing_map(const HybridSystemModel& model,
                             const std::vector<double>& field_grid,
                             const std::vector<double>& frequency_grid) {
    model.validate();
    SpectrumMap map;
    map.field_axis = field_grid;
    map.frequency_axis = frequency_grid;
    map.values.resize(static_cast<Eigen::Index>(field_grid.size()),
                      static_cast<Eigen::Index>(frequency_grid.size()));

    auto column = [&](std::size_t i) {
        HybridSystemModel local = model;
        try {
            local.set_bias_field(field_grid[i]);
            for (std::size_t j = 0; j < frequency_grid.size(); ++j)
                map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    s21(local, frequency_grid[j]);
        } catch (const std::exception& e) {
            throw NumericError("anticrossing_map at B0=" + std::to_string(field_grid[i]) +
                               " T: " + e.what());
        }
    };

    const unsigned workers = std::min<unsigned>(grid_thread_count(),
                                                static_cast<unsigned>(field_grid.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < field_grid.size(); ++i) column(i);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < field_grid.size(); i += workers) column(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    map.validate();
    return map;
}

void SpectrumMap::validate() const {
    auto increasing = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] <= v[i - 1]) return false;
        return true;
    };
    if (field_axis.empty() || frequency_axis.empty())
        throw ConfigError("SpectrumMap: empty axis");
    if (!increasing(field_axis) || !increasing(frequency_axis))
        throw ConfigError("SpectrumMap: axes must be strictly increasing");
    if (values.rows() != static_cast<Eigen::Index>(field_axis.size()) ||
        values.cols() != static_cast<Eigen::Index>(frequency_axis.size()))
        throw ConfigError("SpectrumMap: value dimensions do not match axes");
    if (!values.allFinite())
        throw NumericError("SpectrumMap: non-finite transmission value");
}

}  // namespace cmp
