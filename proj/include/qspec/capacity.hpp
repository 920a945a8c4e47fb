#pragma once

#include "qspec/channels.hpp"
#include "qspec/spectrum.hpp"

#include <cstdint>
#include <vector>

namespace qspec {

/// Labeled state family {p_x, rho_x} on a common space.
struct CQEnsemble {
    std::vector<double> priors;
    std::vector<Matrix> states;

    CQEnsemble(std::vector<double> p, std::vector<Matrix> s);

    int dim() const { return static_cast<int>(states.front().rows()); }
    size_t size() const { return states.size(); }

    Matrix average() const; // rho-bar = sum_x p_x rho_x
    CQEnsemble apply_channel(const KrausChannel& phi) const;
    /// Block-diagonal classical-quantum state sum_x p_x |x><x| (x) rho_x.
    Matrix cq_state() const;
};

/// Random-coding codebook: message i carries ensemble label codewords[i];
/// decoder elements follow the same indexing (the failure outcome E^0 stays
/// implicit).
struct CodeBook {
    int m;
    std::vector<int> codewords;
    POVM decoder;
};

/// 2 sum_x p_x Tr[{rho_x - e^{n gamma} rho_bar <= 0} rho_x] + 4 e^{-n gamma} M.
double hn_bound(const CQEnsemble& output_ensemble, int n, double gamma, int m);

/// Pretty-good measurement of the thresholded projectors
/// Pi_i = {states[i] >= e^{n gamma} reference}: E_i = S^{-1/2} Pi_i S^{-1/2}
/// with S = sum_j Pi_j pseudo-inverted on its range (cutoff 1e-10). Throws
/// when every projector vanishes.
POVM pgm_decoder(const std::vector<Matrix>& states, const Matrix& reference, int n,
                 double gamma);

/// Draw M codewords i.i.d. from the priors and decode with the pretty-good
/// measurement of the thresholded projectors Pi_i = {rho_{x_i} >= e^{n gamma} rho_bar}.
CodeBook pgm_codebook(const CQEnsemble& output_ensemble, int n, int m, double gamma,
                      std::uint64_t seed);

double average_error(const CodeBook& codebook, const CQEnsemble& output_ensemble);

/// P_e >= 1 - Tr[{Pi_n(gamma) >= 0} Pi_n(gamma)] - e^{n gamma}/M for any code
/// of size M generated with uniform message probabilities, where
/// Pi_n(gamma) = joint - e^{n gamma} (marginal_A (x) marginal_Q).
double converse_error_bound(const Matrix& joint_a_lq, const SubsystemShape& shape, int n,
                            double gamma, int m);

struct CapacityEstimate {
    double capacity = 0.0;       // best inf-spectral mutual information estimate
    size_t best_ensemble = 0;
    std::vector<std::vector<double>> per_ensemble_per_n;
    std::vector<int> n_sweep;
};

/// Max over the supplied candidate input ensembles of the inf-spectral mutual
/// information rate of the cq output state, estimated at each block length in
/// the sweep (the reported capacity uses the largest).
CapacityEstimate capacity_estimate(const std::vector<CQEnsemble>& candidates,
                                   const KrausChannel& channel,
                                   const std::vector<int>& n_sweep,
                                   const EstimatorOptions& opt);

} // namespace qspec
