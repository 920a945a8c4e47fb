#pragma once

#include "qspec/capacity.hpp"
#include "qspec/channels.hpp"
#include "qspec/spectrum.hpp"

#include <cstdint>
#include <vector>

namespace qspec {

/// Shift-multiply unitary U_(p,q)|j> = e^{2 pi i p j / D} |j + q mod D>.
Matrix weyl(int dim, int p, int q);

/// All D^2 shift-multiply unitaries on a D-dimensional space.
class WeylSet {
public:
    explicit WeylSet(int dim);
    int dim() const { return dim_; }
    const Matrix& op(int p, int q) const { return ops_[p * dim_ + q]; }
    const std::vector<Matrix>& all() const { return ops_; }

private:
    int dim_;
    std::vector<Matrix> ops_;
};

/// (1/D^2) sum_{p,q} (U_(p,q) (x) I) rho (U_(p,q) (x) I)^dag; equals
/// I/D (x) rho_B exactly.
Matrix weyl_twirl(const Matrix& rho_ab, int dim_a, int dim_b);

/// Shared entangled state plus sender-side preprocessing; construction checks
/// the twirl identity for the processed state.
struct DenseCodingInstance {
    BipartiteFactor state;
    KrausChannel preprocessing;

    DenseCodingInstance(BipartiteFactor s, KrausChannel lambda);
    BipartiteFactor processed() const;
};

/// n copies of the factor with subsystems reordered to (A^n) (x) (B^n), so
/// block encodings act on the left factor.
Matrix blocked_bipartite_state(const BipartiteFactor& rho, int n);

/// S-bar(Lambda A | B) estimate for the iid resource with the given factor.
double conditional_sup_entropy_estimate(const BipartiteFactor& rho,
                                        const KrausChannel& lambda_a, int n,
                                        const EstimatorOptions& opt);

struct LambdaSearchResult {
    KrausChannel best_channel;
    double value;        // winner's conditional sup-entropy estimate
    double id_value;     // estimate at Lambda = id
    int winning_restart; // -1 when the identity channel wins
    int eval_n;          // block length used for the winner's estimate
};

/// Minimize the conditional sup-entropy estimate over CPTP preprocessing maps
/// on A: seeded random Stinespring isometries refined by hill climbing on the
/// isometry parameters; the identity channel is always among the candidates.
LambdaSearchResult minimize_lambda(const BipartiteFactor& rho, int n, int restarts,
                                   std::uint64_t seed, const EstimatorOptions& opt);

struct DCCapacity {
    double capacity; // log d - min S-bar estimate
    LambdaSearchResult search;
};

DCCapacity dc_capacity_estimate(const BipartiteFactor& rho, int n, int restarts,
                                std::uint64_t seed, const EstimatorOptions& opt);

/// Single-letter benchmark for iid resources:
/// log d + S(B) - min_Lambda (1/N) S((Lambda (x) id) rho^{(x)N}).
struct HorEvaluation {
    double capacity;
    double min_entropy_rate;
    int winning_restart;
};

HorEvaluation hor_capacity(const BipartiteFactor& rho, int copies, int restarts,
                           std::uint64_t seed);

struct DCSimulation {
    double p_e;
    double hn_bound_adapted;
    std::vector<int> labels; // Weyl labels p*D+q per message
};

/// Protocol simulation: M distinct Weyl encodings of the preprocessed block
/// state, decoded with the pretty-good measurement against the twirled
/// average I/D (x) rho_B^n.
DCSimulation dc_simulate(const BipartiteFactor& rho, const KrausChannel& lambda_a, int n,
                         int m, double gamma, std::uint64_t seed);

/// P_e >= 1 - max_i Tr[Pi_n,i(gamma)] - e^{n(log d - gamma)} / M for any code
/// whose encodings act on A alone.
double dc_converse_bound(const std::vector<Matrix>& codewords, const Matrix& rho_b_block,
                         int n, double gamma, int m, int d);

} // namespace qspec
