#include "qspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qspec {

namespace {

constexpr double kRelTie = 1e-12;

bool nonnegative_with_tie(double pi_eig, double scale) {
    return pi_eig >= -kRelTie * std::max(1.0, scale);
}

double multinomial_weight(int n, const std::vector<int>& counts) {
    double w = 1.0;
    int remaining = n;
    for (int c : counts) {
        // C(remaining, c) by the multiplicative formula; exact in double at
        // desk-scale n.
        double binom = 1.0;
        for (int i = 1; i <= c; ++i) {
            binom = binom * static_cast<double>(remaining - c + i) / static_cast<double>(i);
        }
        w *= std::round(binom);
        remaining -= c;
    }
    return w;
}

void enumerate_compositions(int n, int parts,
                            const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> counts(parts, 0);
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
        if (pos == parts - 1) {
            counts[pos] = remaining;
            visit(counts);
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            counts[pos] = c;
            rec(pos + 1, remaining - c);
        }
    };
    rec(0, n);
}

bool approx_identity(const Matrix& m) {
    return (m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= 1e-12;
}

} // namespace

std::optional<std::vector<std::vector<double>>> common_eigenbasis(
    const std::vector<Matrix>& ops, double tol) {
    if (ops.empty()) return std::nullopt;
    const int d = static_cast<int>(ops[0].rows());
    for (const Matrix& m : ops) {
        if (m.rows() != d || m.cols() != d) return std::nullopt;
    }
    // Generic irrational combination separates the joint eigenspaces.
    static const double coeffs[] = {1.0,
                                    1.4142135623730951,
                                    1.7320508075688772,
                                    2.2360679774997896,
                                    2.6457513110645907,
                                    3.3166247903553998};
    Matrix combo = Matrix::Zero(d, d);
    for (size_t m = 0; m < ops.size(); ++m) {
        combo += coeffs[m % 6] * ops[m];
    }
    EigSystem es = eig(combo);
    std::vector<std::vector<double>> vals(ops.size(), std::vector<double>(d, 0.0));
    for (size_t m = 0; m < ops.size(); ++m) {
        Matrix rotated = es.eigenvectors.adjoint() * ops[m] * es.eigenvectors;
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                if (i != j && std::abs(rotated(i, j)) > tol) return std::nullopt;
            }
            vals[m][i] = rotated(i, i).real();
        }
    }
    return vals;
}

Source Source::iid(const Matrix& rho_factor, const Matrix& ref_factor) {
    if (rho_factor.rows() != ref_factor.rows()) {
        throw std::invalid_argument("Source::iid: factor dimension mismatch");
    }
    Source s;
    s.kind_ = Kind::Iid;
    s.rho_factor_ = rho_factor;
    s.ref_factor_ = ref_factor;
    s.beta_ = std::log(static_cast<double>(rho_factor.rows()));
    s.ref_identity_ = approx_identity(ref_factor);
    return s;
}

Source Source::iid_entropy(const Matrix& rho_factor) {
    return iid(rho_factor, Matrix::Identity(rho_factor.rows(), rho_factor.cols()));
}

Source Source::product(std::vector<std::pair<Matrix, Matrix>> factors) {
    if (factors.empty()) throw std::invalid_argument("Source::product: no factors");
    Source s;
    s.kind_ = Kind::Product;
    double max_log_dim = 0.0;
    s.ref_identity_ = true;
    for (const auto& [rho, ref] : factors) {
        if (rho.rows() != ref.rows()) {
            throw std::invalid_argument("Source::product: factor dimension mismatch");
        }
        max_log_dim = std::max(max_log_dim, std::log(static_cast<double>(rho.rows())));
        s.ref_identity_ = s.ref_identity_ && approx_identity(ref);
    }
    s.beta_ = max_log_dim;
    s.factors_ = std::move(factors);
    return s;
}

Source Source::mixture(double t, const Matrix& sigma_factor, const Matrix& omega_factor) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("Source::mixture: t must be in (0,1)");
    if (sigma_factor.rows() != omega_factor.rows()) {
        throw std::invalid_argument("Source::mixture: factor dimension mismatch");
    }
    Source s;
    s.kind_ = Kind::Mixture;
    s.t_ = t;
    s.sigma_factor_ = sigma_factor;
    s.omega_factor_ = omega_factor;
    s.beta_ = std::log(static_cast<double>(sigma_factor.rows()));
    s.ref_identity_ = true;
    return s;
}

Source Source::general(Generator gen, double beta, bool ref_is_identity) {
    Source s;
    s.kind_ = Kind::General;
    s.gen_ = std::move(gen);
    s.beta_ = beta;
    s.ref_identity_ = ref_is_identity;
    return s;
}

int Source::max_n() const {
    if (kind_ == Kind::Product) return static_cast<int>(factors_.size());
    return std::numeric_limits<int>::max();
}

std::pair<Matrix, Matrix> Source::dense_pair(int n) const {
    if (n < 1) throw std::invalid_argument("Source::dense_pair: n must be >= 1");
    switch (kind_) {
        case Kind::Iid: {
            const double dim = std::pow(static_cast<double>(rho_factor_.rows()), n);
            if (dim > kDenseDimCap) {
                throw std::runtime_error("Source::dense_pair: block dimension above dense cap");
            }
            return {kron_power(rho_factor_, n), kron_power(ref_factor_, n)};
        }
        case Kind::Product: {
            if (n > max_n()) throw std::invalid_argument("Source::dense_pair: n beyond factor list");
            Matrix rho = factors_[0].first;
            Matrix ref = factors_[0].second;
            for (int i = 1; i < n; ++i) {
                if (rho.rows() * factors_[i].first.rows() > kDenseDimCap) {
                    throw std::runtime_error("Source::dense_pair: block dimension above dense cap");
                }
                rho = tensor(rho, factors_[i].first);
                ref = tensor(ref, factors_[i].second);
            }
            return {rho, ref};
        }
        case Kind::Mixture: {
            const double dim = std::pow(static_cast<double>(sigma_factor_.rows()), n);
            if (dim > kDenseDimCap) {
                throw std::runtime_error("Source::dense_pair: block dimension above dense cap");
            }
            Matrix rho = t_ * kron_power(sigma_factor_, n) + (1.0 - t_) * kron_power(omega_factor_, n);
            return {rho, Matrix::Identity(rho.rows(), rho.cols())};
        }
        case Kind::General: {
            auto pair = gen_(n);
            if (pair.first.rows() > kDenseDimCap) {
                throw std::runtime_error("Source::dense_pair: block dimension above dense cap");
            }
            return pair;
        }
    }
    throw std::logic_error("Source::dense_pair: unreachable");
}

BlockSpectrum iid_block_spectrum(const std::vector<std::pair<double, double>>& factor_eigs,
                                 int n) {
    const int d = static_cast<int>(factor_eigs.size());
    BlockSpectrum out;
    enumerate_compositions(n, d, [&](const std::vector<int>& counts) {
        double rho = 1.0, ref = 1.0;
        for (int i = 0; i < d; ++i) {
            rho *= std::pow(factor_eigs[i].first, counts[i]);
            ref *= std::pow(factor_eigs[i].second, counts[i]);
        }
        out.push_back({rho, ref, multinomial_weight(n, counts)});
    });
    return out;
}

std::optional<BlockSpectrum> Source::block_spectrum(int n) const {
    switch (kind_) {
        case Kind::Iid: {
            auto basis = common_eigenbasis({rho_factor_, ref_factor_});
            if (!basis) return std::nullopt;
            std::vector<std::pair<double, double>> pairs;
            for (size_t i = 0; i < (*basis)[0].size(); ++i) {
                pairs.emplace_back((*basis)[0][i], (*basis)[1][i]);
            }
            return iid_block_spectrum(pairs, n);
        }
        case Kind::Mixture: {
            auto basis = common_eigenbasis({sigma_factor_, omega_factor_});
            if (!basis) return std::nullopt;
            const int d = static_cast<int>((*basis)[0].size());
            BlockSpectrum out;
            enumerate_compositions(n, d, [&](const std::vector<int>& counts) {
                double sig = 1.0, omg = 1.0;
                for (int i = 0; i < d; ++i) {
                    sig *= std::pow((*basis)[0][i], counts[i]);
                    omg *= std::pow((*basis)[1][i], counts[i]);
                }
                out.push_back({t_ * sig + (1.0 - t_) * omg, 1.0, multinomial_weight(n, counts)});
            });
            return out;
        }
        case Kind::Product: {
            if (n > max_n()) return std::nullopt;
            BlockSpectrum acc{{1.0, 1.0, 1.0}};
            double total = 1.0;
            for (int i = 0; i < n; ++i) {
                auto basis = common_eigenbasis({factors_[i].first, factors_[i].second});
                if (!basis) return std::nullopt;
                const int d = static_cast<int>((*basis)[0].size());
                total *= d;
                if (total > 2.0e6) return std::nullopt; // enumeration would not pay off
                BlockSpectrum next;
                next.reserve(acc.size() * d);
                for (const SpectralClass& c : acc) {
                    for (int j = 0; j < d; ++j) {
                        next.push_back({c.rho_eig * (*basis)[0][j],
                                        c.ref_eig * (*basis)[1][j], c.weight});
                    }
                }
                acc = std::move(next);
            }
            return acc;
        }
        case Kind::General:
            return std::nullopt;
    }
    return std::nullopt;
}

double Source::vn_rate(int n) const {
    if (auto spec = block_spectrum(n)) {
        double s = 0.0;
        for (const SpectralClass& c : *spec) {
            if (c.rho_eig >= 1e-300) s -= c.weight * c.rho_eig * std::log(c.rho_eig);
        }
        return s / n;
    }
    auto [rho, ref] = dense_pair(n);
    (void)ref;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho, Eigen::EigenvaluesOnly);
    return entropy_of_spectrum(solver.eigenvalues()) / n;
}

DiffTracePoint difference_trace_point(const Matrix& rho_n, const Matrix& omega_n, int n,
                                      double gamma) {
    if (rho_n.rows() != omega_n.rows() || rho_n.cols() != omega_n.cols()) {
        throw std::invalid_argument("difference_trace: dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> ref_solver(omega_n, Eigen::EigenvaluesOnly);
    if (ref_solver.eigenvalues().minCoeff() < -kPsdTol) {
        throw std::invalid_argument("difference_trace: reference operator not PSD");
    }
    const double scale = std::exp(n * gamma);
    Matrix pi = rho_n - scale * omega_n;
    EigSystem es = eig(pi);
    double trace = 0.0, mass = 0.0;
    for (int i = 0; i < es.eigenvalues.size(); ++i) {
        if (nonnegative_with_tie(es.eigenvalues[i], scale)) {
            trace += es.eigenvalues[i];
            mass += (es.eigenvectors.col(i).adjoint() * rho_n * es.eigenvectors.col(i))(0, 0)
                        .real();
        }
    }
    return {trace, mass};
}

double difference_trace(const Matrix& rho_n, const Matrix& omega_n, int n, double gamma) {
    return difference_trace_point(rho_n, omega_n, n, gamma).trace;
}

DiffTracePoint fast_curve_point(const BlockSpectrum& spectrum, int n, double gamma) {
    const double c = std::exp(n * gamma);
    double trace = 0.0, mass = 0.0;
    for (const SpectralClass& cls : spectrum) {
        const double pi = cls.rho_eig - c * cls.ref_eig;
        const double scale = std::max(std::abs(cls.rho_eig), std::abs(c * cls.ref_eig));
        if (pi >= -kRelTie * std::max(scale, 1e-300)) {
            trace += cls.weight * pi;
            mass += cls.weight * cls.rho_eig;
        }
    }
    return {trace, mass};
}

double product_trace_fastpath(const std::vector<std::pair<double, double>>& factor_eigs,
                              int n, double gamma) {
    for (const auto& [r, w] : factor_eigs) {
        (void)r;
        if (w < -kPsdTol) {
            throw std::invalid_argument("product_trace_fastpath: reference eigenvalue < 0");
        }
    }
    return fast_curve_point(iid_block_spectrum(factor_eigs, n), n, gamma).trace;
}

double product_trace_fastpath(
    const std::vector<std::vector<std::pair<double, double>>>& factors, double gamma) {
    if (factors.empty()) throw std::invalid_argument("product_trace_fastpath: no factors");
    BlockSpectrum acc{{1.0, 1.0, 1.0}};
    for (const auto& factor : factors) {
        BlockSpectrum next;
        next.reserve(acc.size() * factor.size());
        for (const SpectralClass& c : acc) {
            for (const auto& [r, w] : factor) {
                if (w < -kPsdTol) {
                    throw std::invalid_argument(
                        "product_trace_fastpath: reference eigenvalue < 0");
                }
                next.push_back({c.rho_eig * r, c.ref_eig * w, c.weight});
            }
        }
        acc = std::move(next);
    }
    return fast_curve_point(acc, static_cast<int>(factors.size()), gamma).trace;
}

CurveEvaluator::CurveEvaluator(const Source& src, int n) : n_(n) {
    spectrum_ = src.block_spectrum(n);
    if (!spectrum_) {
        auto pair = src.dense_pair(n);
        rho_ = std::move(pair.first);
        ref_ = std::move(pair.second);
    }
}

DiffTracePoint CurveEvaluator::at(double gamma) const {
    if (spectrum_) return fast_curve_point(*spectrum_, n_, gamma);
    return difference_trace_point(rho_, ref_, n_, gamma);
}

SpectralTraceCurve sample_curve(const Source& src, int n, const GammaWindow& window,
                                int grid) {
    if (grid < 2) throw std::invalid_argument("sample_curve: grid too small");
    CurveEvaluator eval(src, n);
    SpectralTraceCurve curve;
    curve.n = n;
    curve.samples.reserve(grid);
    const double step = (window.hi - window.lo) / (grid - 1);
    for (int i = 0; i < grid; ++i) {
        const double gamma = window.lo + i * step;
        DiffTracePoint p = eval.at(gamma);
        curve.samples.push_back({gamma, p.trace, p.mass});
    }
    return curve;
}

namespace {

void validate_options(const EstimatorOptions& opt) {
    if (!(opt.epsilon > 0.0 && opt.epsilon < 0.5)) {
        throw std::invalid_argument("estimator: epsilon must lie in (0, 0.5)");
    }
    if (opt.grid < 8) throw std::invalid_argument("estimator: grid must be >= 8");
    if (!(opt.window.hi > opt.window.lo)) {
        throw std::invalid_argument("estimator: empty gamma window");
    }
}

GammaWindow widen(const GammaWindow& w) {
    const double c = 0.5 * (w.lo + w.hi);
    const double half = (w.hi - w.lo);
    return {c - half, c + half};
}

// Smallest gamma where pred flips false -> true between grid neighbours,
// refined by bisection. pred must be monotone along the grid.
double refine_crossing(const CurveEvaluator& eval, double lo, double hi, int bits,
                       const std::function<bool(const DiffTracePoint&)>& pred) {
    for (int i = 0; i < bits; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (pred(eval.at(mid))) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

RateEstimate crossing_estimate(const Source& src, int n, const EstimatorOptions& opt,
                               RateSide side) {
    validate_options(opt);
    GammaWindow window = opt.window;
    for (int attempt = 0; attempt < 2; ++attempt) {
        CurveEvaluator eval(src, n);
        const double step = (window.hi - window.lo) / (opt.grid - 1);
        std::vector<double> mass(opt.grid);
        for (int i = 0; i < opt.grid; ++i) {
            mass[i] = eval.at(window.lo + i * step).mass;
        }
        if (side == RateSide::Sup) {
            // Smallest grid gamma with mass <= epsilon.
            int idx = -1;
            for (int i = 0; i < opt.grid; ++i) {
                if (mass[i] <= opt.epsilon) {
                    idx = i;
                    break;
                }
            }
            if (idx > 0) {
                const double lo = window.lo + (idx - 1) * step;
                const double hi = window.lo + idx * step;
                const double gamma_hat =
                    refine_crossing(eval, lo, hi, opt.bisection_bits,
                                    [&](const DiffTracePoint& p) { return p.mass <= opt.epsilon; });
                return RateEstimate{gamma_hat, n, opt.epsilon, side};
            }
        } else {
            // Largest grid gamma with mass >= 1 - epsilon.
            int idx = -1;
            for (int i = opt.grid - 1; i >= 0; --i) {
                if (mass[i] >= 1.0 - opt.epsilon) {
                    idx = i;
                    break;
                }
            }
            if (idx >= 0 && idx < opt.grid - 1) {
                const double lo = window.lo + idx * step;
                const double hi = window.lo + (idx + 1) * step;
                // Predicate flips true (mass high) -> false going right; keep
                // the last gamma still above the level.
                double a = lo, b = hi;
                for (int i = 0; i < opt.bisection_bits; ++i) {
                    const double mid = 0.5 * (a + b);
                    if (eval.at(mid).mass >= 1.0 - opt.epsilon) {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                return RateEstimate{0.5 * (a + b), n, opt.epsilon, side};
            }
        }
        window = widen(window);
    }
    std::ostringstream oss;
    oss << (side == RateSide::Sup ? "sup" : "inf")
        << "_divergence_estimate: window does not bracket the crossing; widen window";
    throw std::runtime_error(oss.str());
}

} // namespace

RateEstimate sup_divergence_estimate(const Source& src, int n, const EstimatorOptions& opt) {
    return crossing_estimate(src, n, opt, RateSide::Sup);
}

RateEstimate inf_divergence_estimate(const Source& src, int n, const EstimatorOptions& opt) {
    return crossing_estimate(src, n, opt, RateSide::Inf);
}

EntropyEstimates spectral_entropy_estimates(const Source& src, int n,
                                            const EstimatorOptions& opt) {
    if (!src.ref_is_identity()) {
        throw std::invalid_argument(
            "spectral_entropy_estimates: source reference must be the identity");
    }
    EstimatorOptions div_opt = opt;
    div_opt.window = {-opt.window.hi, -opt.window.lo};
    RateEstimate inf_div = inf_divergence_estimate(src, n, div_opt);
    RateEstimate sup_div = sup_divergence_estimate(src, n, div_opt);
    return EntropyEstimates{-inf_div.gamma_hat, -sup_div.gamma_hat, sup_div, inf_div};
}

Matrix BipartiteFactor::marginal_a() const {
    return partial_trace(rho_ab, SubsystemShape{{dim_a, dim_b}}, {0});
}

Matrix BipartiteFactor::marginal_b() const {
    return partial_trace(rho_ab, SubsystemShape{{dim_a, dim_b}}, {1});
}

EntropyEstimates conditional_entropy_estimates(const BipartiteFactor& factor, int n,
                                               const EstimatorOptions& opt) {
    SubsystemShape shape{{factor.dim_a, factor.dim_b}};
    shape.validate_against(static_cast<int>(factor.rho_ab.rows()));
    Matrix ref = tensor(Matrix::Identity(factor.dim_a, factor.dim_a), factor.marginal_b());
    Source src = Source::iid(factor.rho_ab, ref);
    EstimatorOptions div_opt = opt;
    div_opt.window = {-opt.window.hi, -opt.window.lo};
    RateEstimate inf_div = inf_divergence_estimate(src, n, div_opt);
    RateEstimate sup_div = sup_divergence_estimate(src, n, div_opt);
    return EntropyEstimates{-inf_div.gamma_hat, -sup_div.gamma_hat, sup_div, inf_div};
}

MutualInfoEstimates mutual_information_estimates(const BipartiteFactor& factor, int n,
                                                 const EstimatorOptions& opt) {
    SubsystemShape shape{{factor.dim_a, factor.dim_b}};
    shape.validate_against(static_cast<int>(factor.rho_ab.rows()));
    Matrix ref = tensor(factor.marginal_a(), factor.marginal_b());
    Source src = Source::iid(factor.rho_ab, ref);
    RateEstimate sup_div = sup_divergence_estimate(src, n, opt);
    RateEstimate inf_div = inf_divergence_estimate(src, n, opt);
    return MutualInfoEstimates{sup_div.gamma_hat, inf_div.gamma_hat, sup_div, inf_div};
}

} // namespace qspec
