#pragma once

#include "qspec/operators.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace qspec {

/// One eigenvalue class of the commuting pair (rho_n, omega_n) in a shared
/// eigenbasis: `weight` counts basis vectors carrying this (rho, ref) pair.
struct SpectralClass {
    double rho_eig;
    double ref_eig;
    double weight;
};

using BlockSpectrum = std::vector<SpectralClass>;

/// Value of the thresholded difference operator at one gamma:
///   trace = Tr[{Pi_n(gamma) >= 0} Pi_n(gamma)]   (sum of nonnegative eigenvalues)
///   mass  = Tr[{Pi_n(gamma) >= 0} rho_n]         (state weight of that eigenspace)
/// with Pi_n(gamma) = rho_n - e^{n gamma} omega_n.
struct DiffTracePoint {
    double trace;
    double mass;
};

struct CurvePoint {
    double gamma;
    double trace;
    double mass;
};

struct SpectralTraceCurve {
    int n = 0;
    std::vector<CurvePoint> samples;
};

enum class RateSide { Sup, Inf };

struct RateEstimate {
    double gamma_hat = 0.0;
    int n = 0;
    double epsilon = 0.0;
    RateSide side = RateSide::Sup;
};

struct GammaWindow {
    double lo;
    double hi;
};

struct EstimatorOptions {
    GammaWindow window{-1.0, 1.0};
    int grid = 64;
    double epsilon = 0.01;
    int bisection_bits = 10; // refine the crossing to grid-step / 2^bits
};

/// A source sequence n -> (rho_n, omega_n). The iid/product/mixture kinds
/// expose the commuting-product fast path; anything else takes the dense path
/// (capped at kDenseDimCap).
class Source {
public:
    enum class Kind { General, Iid, Product, Mixture };
    using Generator = std::function<std::pair<Matrix, Matrix>(int)>;

    static Source iid(const Matrix& rho_factor, const Matrix& ref_factor);
    static Source iid_entropy(const Matrix& rho_factor); // reference = identity
    static Source product(std::vector<std::pair<Matrix, Matrix>> factors);
    /// rho_n = t sigma^(x)n + (1-t) omega^(x)n against the identity reference.
    static Source mixture(double t, const Matrix& sigma_factor, const Matrix& omega_factor);
    static Source general(Generator gen, double beta, bool ref_is_identity);

    Kind kind() const { return kind_; }
    double beta() const { return beta_; }
    bool ref_is_identity() const { return ref_identity_; }
    int max_n() const;

    /// Dense (rho_n, omega_n); throws above the dense dimension cap.
    std::pair<Matrix, Matrix> dense_pair(int n) const;
    /// Joint eigenvalue classes of (rho_n, omega_n) when the structure
    /// commutes; nullopt otherwise.
    std::optional<BlockSpectrum> block_spectrum(int n) const;
    /// (1/n) S(rho_n).
    double vn_rate(int n) const;

    static constexpr int kDenseDimCap = 4608;

private:
    Source() = default;

    Kind kind_ = Kind::General;
    double beta_ = 0.0;
    bool ref_identity_ = false;
    double t_ = 0.0;
    Matrix rho_factor_, ref_factor_;   // iid
    Matrix sigma_factor_, omega_factor_; // mixture
    std::vector<std::pair<Matrix, Matrix>> factors_; // product
    Generator gen_; // general
};

/// Simultaneous eigenbasis of a family of pairwise-commuting Hermitian
/// matrices; vals[m][i] is the eigenvalue of ops[m] on basis vector i.
/// Returns nullopt if the family does not commute within tolerance.
std::optional<std::vector<std::vector<double>>> common_eigenbasis(
    const std::vector<Matrix>& ops, double tol = 1e-9);

/// Tr[{Pi >= 0} Pi] and the state mass of the nonnegative eigenspace, dense.
DiffTracePoint difference_trace_point(const Matrix& rho_n, const Matrix& omega_n, int n,
                                      double gamma);
double difference_trace(const Matrix& rho_n, const Matrix& omega_n, int n, double gamma);

/// Same functional evaluated from a commuting-product block spectrum.
DiffTracePoint fast_curve_point(const BlockSpectrum& spectrum, int n, double gamma);

/// T_n(gamma) from factor eigenvalue pairs (rho_i, omega_i) of a single iid
/// factor in a shared eigenbasis, without forming d^n matrices.
double product_trace_fastpath(const std::vector<std::pair<double, double>>& factor_eigs,
                              int n, double gamma);
/// Same for position-dependent factors (block length = factors.size()).
double product_trace_fastpath(
    const std::vector<std::vector<std::pair<double, double>>>& factors, double gamma);

BlockSpectrum iid_block_spectrum(const std::vector<std::pair<double, double>>& factor_eigs,
                                 int n);

/// Evaluates (trace, mass) at arbitrary gamma for a fixed source and block
/// length, choosing the fast path when the structure allows it.
class CurveEvaluator {
public:
    CurveEvaluator(const Source& src, int n);
    DiffTracePoint at(double gamma) const;
    bool fast() const { return static_cast<bool>(spectrum_); }
    int n() const { return n_; }

private:
    int n_;
    std::optional<BlockSpectrum> spectrum_;
    Matrix rho_, ref_;
};

SpectralTraceCurve sample_curve(const Source& src, int n, const GammaWindow& window,
                                int grid);

/// Crossing estimators for the divergence rates. The finite-n surrogate
/// locates the level crossing of the success-mass curve
///   G_n(gamma) = Tr[{Pi_n(gamma) >= 0} rho_n],
/// sup side: smallest gamma with G <= epsilon; inf side: largest gamma with
/// G >= 1 - epsilon; both refined by bisection. The window is auto-widened
/// once by 2x before failing.
RateEstimate sup_divergence_estimate(const Source& src, int n, const EstimatorOptions& opt);
RateEstimate inf_divergence_estimate(const Source& src, int n, const EstimatorOptions& opt);

struct EntropyEstimates {
    double sup_entropy; // estimate of S-bar
    double inf_entropy; // estimate of S-underbar
    RateEstimate sup_div;
    RateEstimate inf_div;
};

/// Spectral entropy-rate estimates for a source with identity reference;
/// options window is on the entropy scale.
EntropyEstimates spectral_entropy_estimates(const Source& src, int n,
                                            const EstimatorOptions& opt);

struct BipartiteFactor {
    Matrix rho_ab;
    int dim_a;
    int dim_b;

    Matrix marginal_a() const;
    Matrix marginal_b() const;
};

/// S-bar(A|B) and S-underbar(A|B) estimates for the iid source with factor
/// rho_ab against the reference I_A (x) rho_B. Window on the entropy scale.
EntropyEstimates conditional_entropy_estimates(const BipartiteFactor& factor, int n,
                                               const EstimatorOptions& opt);

struct MutualInfoEstimates {
    double sup_mi;
    double inf_mi;
    RateEstimate sup_div;
    RateEstimate inf_div;
};

/// S-bar(A:B), S-underbar(A:B) estimates against rho_A (x) rho_B. Window on
/// the divergence scale.
MutualInfoEstimates mutual_information_estimates(const BipartiteFactor& factor, int n,
                                                 const EstimatorOptions& opt);

} // namespace qspec
