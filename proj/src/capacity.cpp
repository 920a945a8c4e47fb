#include "qspec/capacity.hpp"

#include "qspec/rng.hpp"

#include <cmath>
#include <numeric>

namespace qspec {

CQEnsemble::CQEnsemble(std::vector<double> p, std::vector<Matrix> s)
    : priors(std::move(p)), states(std::move(s)) {
    if (priors.empty() || priors.size() != states.size()) {
        throw std::invalid_argument("CQEnsemble: priors/states size mismatch");
    }
    double sum = 0.0;
    for (double w : priors) {
        if (w < 0.0) throw std::invalid_argument("CQEnsemble: negative prior");
        sum += w;
    }
    if (std::abs(sum - 1.0) > kTraceTol) {
        throw std::invalid_argument("CQEnsemble: priors must sum to 1");
    }
    const int d = static_cast<int>(states.front().rows());
    for (const Matrix& rho : states) {
        if (rho.rows() != d || rho.cols() != d) {
            throw std::invalid_argument("CQEnsemble: states must share one dimension");
        }
    }
}

Matrix CQEnsemble::average() const {
    Matrix avg = Matrix::Zero(dim(), dim());
    for (size_t x = 0; x < size(); ++x) avg += priors[x] * states[x];
    return avg;
}

CQEnsemble CQEnsemble::apply_channel(const KrausChannel& phi) const {
    std::vector<Matrix> out;
    out.reserve(size());
    for (const Matrix& rho : states) out.push_back(phi.apply_matrix(rho));
    return CQEnsemble(priors, std::move(out));
}

Matrix CQEnsemble::cq_state() const {
    const int x_dim = static_cast<int>(size());
    const int q_dim = dim();
    Matrix out = Matrix::Zero(x_dim * q_dim, x_dim * q_dim);
    for (int x = 0; x < x_dim; ++x) {
        out.block(x * q_dim, x * q_dim, q_dim, q_dim) = priors[x] * states[x];
    }
    return out;
}

double hn_bound(const CQEnsemble& output_ensemble, int n, double gamma, int m) {
    const double scale = std::exp(static_cast<double>(n) * gamma);
    const Matrix avg = output_ensemble.average();
    double miss = 0.0;
    for (size_t x = 0; x < output_ensemble.size(); ++x) {
        Projector below = relative_projection(output_ensemble.states[x], Matrix(scale * avg),
                                              Relation::Leq);
        miss += output_ensemble.priors[x] *
                (below.matrix() * output_ensemble.states[x]).trace().real();
    }
    return 2.0 * miss + 4.0 * std::exp(-static_cast<double>(n) * gamma) * m;
}

POVM pgm_decoder(const std::vector<Matrix>& states, const Matrix& reference, int n,
                 double gamma) {
    if (states.empty()) throw std::invalid_argument("pgm_decoder: no states");
    const int d = static_cast<int>(reference.rows());
    const double scale = std::exp(static_cast<double>(n) * gamma);

    std::vector<Matrix> projectors;
    projectors.reserve(states.size());
    double total_rank = 0.0;
    for (const Matrix& state : states) {
        Projector pi = relative_projection(state, Matrix(scale * reference), Relation::Geq);
        total_rank += pi.rank();
        projectors.push_back(pi.matrix());
    }
    if (total_rank == 0.0) {
        throw std::runtime_error("pgm_decoder: threshold too high, all projectors vanish");
    }

    Matrix s = Matrix::Zero(d, d);
    for (const Matrix& pi : projectors) s += pi;
    EigSystem es = eig(s);
    Matrix inv_sqrt = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const double v = es.eigenvalues[i];
        if (v > 1e-10) {
            inv_sqrt += (1.0 / std::sqrt(v)) * es.eigenvectors.col(i) *
                        es.eigenvectors.col(i).adjoint();
        }
    }

    std::vector<Matrix> elements;
    elements.reserve(states.size());
    for (const Matrix& pi : projectors) {
        Matrix e = inv_sqrt * pi * inv_sqrt;
        elements.push_back(0.5 * (e + e.adjoint()));
    }
    return POVM(d, std::move(elements));
}

CodeBook pgm_codebook(const CQEnsemble& output_ensemble, int n, int m, double gamma,
                      std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("pgm_codebook: M must be >= 1");
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<int> codewords(m);
    for (int i = 0; i < m; ++i) {
        // Inverse-CDF draw keeps results identical across standard libraries.
        double u = unif(rng);
        double acc = 0.0;
        int label = static_cast<int>(output_ensemble.size()) - 1;
        for (size_t x = 0; x < output_ensemble.size(); ++x) {
            acc += output_ensemble.priors[x];
            if (u <= acc) {
                label = static_cast<int>(x);
                break;
            }
        }
        codewords[i] = label;
    }

    std::vector<Matrix> states;
    states.reserve(m);
    for (int i = 0; i < m; ++i) states.push_back(output_ensemble.states[codewords[i]]);
    POVM decoder = pgm_decoder(states, output_ensemble.average(), n, gamma);
    return CodeBook{m, std::move(codewords), std::move(decoder)};
}

double average_error(const CodeBook& codebook, const CQEnsemble& output_ensemble) {
    double success = 0.0;
    for (int i = 0; i < codebook.m; ++i) {
        success += (output_ensemble.states[codebook.codewords[i]] *
                    codebook.decoder.elements()[i])
                       .trace()
                       .real();
    }
    return 1.0 - success / codebook.m;
}

double converse_error_bound(const Matrix& joint_a_lq, const SubsystemShape& shape, int n,
                            double gamma, int m) {
    shape.validate_against(static_cast<int>(joint_a_lq.rows()));
    if (shape.factor_dims.size() != 2) {
        throw std::invalid_argument("converse_error_bound: expected a bipartite shape");
    }
    const Matrix rho_a = partial_trace(joint_a_lq, shape, {0});
    const Matrix rho_q = partial_trace(joint_a_lq, shape, {1});
    const double t = difference_trace(joint_a_lq, tensor(rho_a, rho_q), n, gamma);
    return 1.0 - t - std::exp(static_cast<double>(n) * gamma) / m;
}

CapacityEstimate capacity_estimate(const std::vector<CQEnsemble>& candidates,
                                   const KrausChannel& channel,
                                   const std::vector<int>& n_sweep,
                                   const EstimatorOptions& opt) {
    if (candidates.empty() || n_sweep.empty()) {
        throw std::invalid_argument("capacity_estimate: empty candidates or sweep");
    }
    CapacityEstimate result;
    result.n_sweep = n_sweep;
    result.capacity = -std::numeric_limits<double>::infinity();
    for (size_t e = 0; e < candidates.size(); ++e) {
        const CQEnsemble out = candidates[e].apply_channel(channel);
        const Matrix cq = out.cq_state();
        // Reference rho^B (x) rho-bar for the factor-level cq state.
        Matrix prior_diag = Matrix::Zero(out.size(), out.size());
        for (size_t x = 0; x < out.size(); ++x) prior_diag(x, x) = out.priors[x];
        const Matrix ref = tensor(prior_diag, out.average());
        Source src = Source::iid(cq, ref);

        std::vector<double> per_n;
        per_n.reserve(n_sweep.size());
        for (int n : n_sweep) {
            per_n.push_back(inf_divergence_estimate(src, n, opt).gamma_hat);
        }
        if (per_n.back() > result.capacity) {
            result.capacity = per_n.back();
            result.best_ensemble = e;
        }
        result.per_ensemble_per_n.push_back(std::move(per_n));
    }
    return result;
}

} // namespace qspec
