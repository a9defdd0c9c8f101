#include "cmp/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "cmp/errors.hpp"

namespace cmp {

std::string FitParameter::name() const {
    char buf[48];
    switch (kind) {
        case FitParamKind::cavity_omega:
            std::snprintf(buf, sizeof(buf), "omega_c[%d]", i);
            break;
        case FitParamKind::mode_gamma:
            std::snprintf(buf, sizeof(buf), "gamma[%d]", i);
            break;
        case FitParamKind::field_offset:
            std::snprintf(buf, sizeof(buf), "field_offset[%d]", i);
            break;
        case FitParamKind::coupling:
            std::snprintf(buf, sizeof(buf), "g[%d,%d]", i, j);
            break;
    }
    return buf;
}

double FitParameter::get(const HybridSystemModel& model) const {
    switch (kind) {
        case FitParamKind::cavity_omega: return model.modes[static_cast<std::size_t>(i)].omega;
        case FitParamKind::mode_gamma: return model.modes[static_cast<std::size_t>(i)].gamma;
        case FitParamKind::field_offset: return model.modes[static_cast<std::size_t>(i)].field_offset;
        case FitParamKind::coupling: return model.couplings(i, j);
    }
    return 0.0;
}

void FitParameter::set(HybridSystemModel& model, double value) const {
    switch (kind) {
        case FitParamKind::cavity_omega:
            model.modes[static_cast<std::size_t>(i)].omega = value;
            break;
        case FitParamKind::mode_gamma:
            model.modes[static_cast<std::size_t>(i)].gamma = value;
            break;
        case FitParamKind::field_offset:
            model.modes[static_cast<std::size_t>(i)].field_offset = value;
            model.set_bias_field(model.bias_field);
            break;
        case FitParamKind::coupling:
            model.couplings(i, j) = value;
            model.couplings(j, i) = value;
            break;
    }
}

void FitProblem::validate() const {
    data.validate();
    model.validate();
    std::size_t n_free = 0;
    for (const auto& p : parameters) {
        if (p.free) {
            ++n_free;
            const double v = p.get(model);
            if (p.lower > v || p.upper < v)
                throw ConfigError("fit: bounds must contain the initial guess for " + p.name());
        }
    }
    const std::size_t n_points = data.field_axis.size() * data.frequency_axis.size();
    if (n_free * 10 >= n_points)
        throw ConfigError("fit: free parameter count must stay below data points / 10");
}

SpectrumMap residual_map(const FitProblem& problem, const HybridSystemModel& model) {
    SpectrumMap map = anticrossing_map(model, problem.data.field_axis,
                                       problem.data.frequency_axis);
    map.values = (map.values.cwiseAbs() - problem.data.values.cwiseAbs())
                     .cast<std::complex<double>>();
    return map;
}

namespace {

Eigen::VectorXd residual_vector(const FitProblem& problem, const HybridSystemModel& model) {
    const SpectrumMap map = anticrossing_map(model, problem.data.field_axis,
                                             problem.data.frequency_axis);
    const auto rows = map.values.rows();
    const auto cols = map.values.cols();
    Eigen::VectorXd r(rows * cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double m = std::abs(map.values(i, j));
            const double d = std::abs(problem.data.values(i, j));
            r[i * cols + j] = problem.loss == FitLoss::magnitude
                                  ? m - d
                                  : std::log(std::max(m, 1e-300)) -
                                        std::log(std::max(d, 1e-300));
        }
    }
    return r;
}

}  // namespace

FitResult fit_anticrossing(const FitProblem& problem) {
    problem.validate();
    std::vector<const FitParameter*> free_params;
    for (const auto& p : problem.parameters)
        if (p.free) free_params.push_back(&p);
    const auto n = static_cast<Eigen::Index>(free_params.size());

    HybridSystemModel model = problem.model;
    auto apply = [&](const Eigen::VectorXd& p) {
        HybridSystemModel m = model;
        for (Eigen::Index k = 0; k < n; ++k)
            free_params[static_cast<std::size_t>(k)]->set(m, p[k]);
        m.set_bias_field(m.bias_field);
        return m;
    };

    Eigen::VectorXd p(n), lo(n), hi(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto* fp = free_params[static_cast<std::size_t>(k)];
        p[k] = fp->get(model);
        lo[k] = fp->lower;
        hi[k] = fp->upper;
    }

    Eigen::VectorXd r = residual_vector(problem, apply(p));
    const double initial_norm = r.norm();
    double cost = 0.5 * r.squaredNorm();

    FitResult result;
    result.initial_residual_norm = initial_norm;
    for (const auto* fp : free_params) result.names.push_back(fp->name());

    if (n == 0) {
        result.model = apply(p);
        result.residual_norm = initial_norm;
        result.termination = "no free parameters";
        return result;
    }

    double lambda = problem.options.initial_lambda;
    Eigen::MatrixXd jac(r.size(), n);
    std::string termination = "max iterations";
    int iter = 0;

    for (; iter < problem.options.max_iterations; ++iter) {
        // forward-difference Jacobian, relative step per parameter
        for (Eigen::Index k = 0; k < n; ++k) {
            const double h = 1e-6 * std::max(std::abs(p[k]), 1e-30);
            Eigen::VectorXd pk = p;
            // difference backward when the forward step would leave the box
            pk[k] = p[k] + h <= hi[k] ? p[k] + h : p[k] - h;
            pk[k] = std::clamp(pk[k], lo[k], hi[k]);
            const double used = pk[k] - p[k];
            if (used == 0.0)
                throw NumericError("fit: parameter pinned at both bounds: " +
                                   free_params[static_cast<std::size_t>(k)]->name());
            jac.col(k) = (residual_vector(problem, apply(pk)) - r) / used;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;

        const double diag_max = jtj.diagonal().maxCoeff();
        for (Eigen::Index k = 0; k < n; ++k) {
            if (jtj(k, k) <= 1e-28 * diag_max)
                throw NumericError("fit: singular Jacobian, parameter not identifiable: " +
                                   free_params[static_cast<std::size_t>(k)]->name());
        }
        if (jtr.lpNorm<Eigen::Infinity>() < problem.options.gradient_tol * (1.0 + cost)) {
            termination = "gradient tolerance";
            break;
        }

        bool accepted = false;
        for (int inner = 0; inner < 40; ++inner) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal();
            const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
            Eigen::VectorXd trial = p + step;
            for (Eigen::Index k = 0; k < n; ++k)
                trial[k] = std::clamp(trial[k], lo[k], hi[k]);
            Eigen::VectorXd r_trial;
            double cost_trial = std::numeric_limits<double>::infinity();
            try {
                r_trial = residual_vector(problem, apply(trial));
                cost_trial = 0.5 * r_trial.squaredNorm();
            } catch (const std::exception&) {
                // invalid trial model, treat as rejected step
            }
            if (cost_trial < cost) {
                const double step_size = (trial - p).norm();
                p = trial;
                r = std::move(r_trial);
                cost = cost_trial;
                lambda = std::max(lambda / 3.0, 1e-14);
                accepted = true;
                if (step_size < problem.options.step_tol * (1.0 + p.norm())) {
                    termination = "step tolerance";
                    iter = problem.options.max_iterations;  // leaves outer loop too
                }
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e14) break;
        }
        if (!accepted) {
            termination = "no downhill step (local minimum)";
            break;
        }
    }

    // standard errors from the local quadratic approximation at the optimum
    for (Eigen::Index k = 0; k < n; ++k) {
        const double h = 1e-6 * std::max(std::abs(p[k]), 1e-30);
        Eigen::VectorXd pk = p;
        pk[k] += h;
        jac.col(k) = (residual_vector(problem, apply(pk)) - r) / h;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const auto m_points = r.size();
    result.standard_errors.assign(static_cast<std::size_t>(n), 0.0);
    if (m_points > n) {
        const double variance = r.squaredNorm() / static_cast<double>(m_points - n);
        const Eigen::MatrixXd cov = jtj.ldlt().solve(
            Eigen::MatrixXd::Identity(n, n)) * variance;
        for (Eigen::Index k = 0; k < n; ++k)
            result.standard_errors[static_cast<std::size_t>(k)] =
                std::sqrt(std::max(cov(k, k), 0.0));
    }

    result.model = apply(p);
    result.values.assign(p.data(), p.data() + p.size());
    result.residual_norm = std::sqrt(2.0 * cost);
    result.iterations = iter;
    result.termination = termination.empty() ? "max iterations" : termination;
    if (result.residual_norm > result.initial_residual_norm * (1.0 + 1e-12))
        throw NumericError("fit: residual increased, optimizer contract violated");
    return result;
}

std::string FitResult::serialize() const {
    std::ostringstream os;
    auto fmt = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    for (std::size_t k = 0; k < names.size(); ++k) {
        os << names[k] << " = " << fmt(values[k]);
        if (k < standard_errors.size())
            os << " +- " << fmt(standard_errors[k]);
        os << "\n";
    }
    os << "residual_norm = " << fmt(residual_norm) << "\n";
    os << "initial_residual_norm = " << fmt(initial_residual_norm) << "\n";
    os << "iterations = " << iterations << "\n";
    os << "termination = " << termination << "\n";
    return os.str();
}

namespace {

// Strongest local maxima of one map column, strongest first.
std::vector<std::size_t> column_peaks(const SpectrumMap& data, std::size_t col_field,
                                      std::size_t max_peaks) {
    std::vector<std::size_t> peaks;
    const auto nf = data.frequency_axis.size();
    for (std::size_t j = 1; j + 1 < nf; ++j) {
        const double v = std::abs(data.values(static_cast<Eigen::Index>(col_field),
                                              static_cast<Eigen::Index>(j)));
        const double l = std::abs(data.values(static_cast<Eigen::Index>(col_field),
                                              static_cast<Eigen::Index>(j - 1)));
        const double r = std::abs(data.values(static_cast<Eigen::Index>(col_field),
                                              static_cast<Eigen::Index>(j + 1)));
        if (v > l && v >= r) peaks.push_back(j);
    }
    std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(data.values(static_cast<Eigen::Index>(col_field),
                                    static_cast<Eigen::Index>(a))) >
               std::abs(data.values(static_cast<Eigen::Index>(col_field),
                                    static_cast<Eigen::Index>(b)));
    });
    if (peaks.size() > max_peaks) peaks.resize(max_peaks);
    return peaks;
}

}  // namespace

HybridSystemModel seed_from_ridges(const SpectrumMap& data, HybridSystemModel model) {
    data.validate();
    const auto first = column_peaks(data, 0, 2);
    const auto last = column_peaks(data, data.field_axis.size() - 1, 2);
    if (first.size() < 2 || last.size() < 2)
        throw NumericError("seed_from_ridges: need two resolved branches at the scan edges");

    auto freq = [&](std::size_t j) { return data.frequency_axis[j]; };
    // the branch common to both edges is the cavity; the moving one is the magnon
    double best = std::numeric_limits<double>::infinity();
    std::size_t fc = first[0], lc = last[0];
    for (std::size_t a : first) {
        for (std::size_t b : last) {
            const double d = std::abs(freq(a) - freq(b));
            if (d < best) { best = d; fc = a; lc = b; }
        }
    }
    const double omega_c = 0.5 * (freq(fc) + freq(lc));
    const std::size_t fm = first[0] == fc ? first[1] : first[0];
    const std::size_t lm = last[0] == lc ? last[1] : last[0];
    const double gyro = model.constants.gyromagnetic_ratio;
    const double offset = 0.5 * ((freq(fm) - gyro * data.field_axis.front()) +
                                 (freq(lm) - gyro * data.field_axis.back()));

    for (auto& m : model.modes) {
        if (m.kind == ModeKind::cavity) m.omega = omega_c;
        else m.field_offset = offset;
    }
    model.set_bias_field(model.bias_field);
    return model;
}

double spins_from_coupling(double g_cm, double omega_c, double mode_volume,
                           double fill_factor, const PhysicalConstants& consts) {
    if (g_cm <= 0.0 || omega_c <= 0.0 || mode_volume <= 0.0)
        throw ConfigError("spins_from_coupling: arguments must be positive");
    if (fill_factor <= 0.0 || fill_factor > 1.0)
        throw ConfigError("spins_from_coupling: fill factor must be in (0,1]");
    const double ratio = 2.0 * g_cm / consts.gyromagnetic_ratio;
    return ratio * ratio * mode_volume /
           (vacuum_permeability * consts.reduced_planck * omega_c * fill_factor);
}

double coupling_from_spins(double spin_count, double omega_c, double mode_volume,
                           double fill_factor, const PhysicalConstants& consts) {
    if (spin_count <= 0.0 || omega_c <= 0.0 || mode_volume <= 0.0)
        throw ConfigError("coupling_from_spins: arguments must be positive");
    if (fill_factor <= 0.0 || fill_factor > 1.0)
        throw ConfigError("coupling_from_spins: fill factor must be in (0,1]");
    return 0.5 * consts.gyromagnetic_ratio *
           std::sqrt(vacuum_permeability * consts.reduced_planck * omega_c *
                     spin_count * fill_factor / mode_volume);
}

double relaxation_time_from_fit(double gamma_c, double gamma_m, double cavity_weight) {
    if (gamma_c < 0.0 || gamma_m < 0.0)
        throw ConfigError("relaxation_time_from_fit: negative rate");
    if (cavity_weight < 0.0 || cavity_weight > 1.0)
        throw ConfigError("relaxation_time_from_fit: weight must be in [0,1]");
    const double rate = cavity_weight * gamma_c + (1.0 - cavity_weight) * gamma_m;
    if (rate <= 0.0)
        throw ConfigError("relaxation_time_from_fit: zero effective rate");
    return 1.0 / rate;
}

}  // namespace cmp
