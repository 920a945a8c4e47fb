#pragma once

#include "qspec/operators.hpp"

#include <cstdint>
#include <vector>

namespace qspec {

/// CPTP map in Kraus form. Trace preservation (sum K^dag K = I) is validated
/// on construction to 1e-9 entrywise.
class KrausChannel {
public:
    KrausChannel(int in_dim, int out_dim, std::vector<Matrix> kraus_ops);

    static KrausChannel identity_channel(int dim);
    /// Channel from a Stinespring isometry V : in -> out (x) env, with
    /// environment index e giving Kraus operator K_e = (I (x) <e|) V.
    static KrausChannel from_isometry(const Matrix& v, int out_dim, int env_dim);

    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }
    const std::vector<Matrix>& kraus() const { return kraus_; }

    /// Sum_k K x K^dag on an arbitrary operator (used by the operator lemmas).
    Matrix apply_matrix(const Matrix& x) const;
    DensityMatrix apply(const DensityMatrix& rho) const;

private:
    int in_dim_;
    int out_dim_;
    std::vector<Matrix> kraus_;
};

/// Measurement with possibly incomplete elements; the deficit I - sum E is
/// required to be PSD (the implicit failure outcome completes it).
class POVM {
public:
    POVM(int dim, std::vector<Matrix> elements);

    int dim() const { return dim_; }
    const std::vector<Matrix>& elements() const { return elements_; }
    size_t size() const { return elements_.size(); }

private:
    int dim_;
    std::vector<Matrix> elements_;
};

/// F(rho, Phi) = sum_k |Tr(K_k rho)|^2; invariant under changes of Kraus
/// representation.
double entanglement_fidelity(const DensityMatrix& rho, const KrausChannel& phi);

/// Kraus list of all products K2 K1 (apply phi1, then phi2).
KrausChannel compose(const KrausChannel& phi2, const KrausChannel& phi1);

/// phi_a (x) phi_b acting factorwise.
KrausChannel tensor_channel(const KrausChannel& a, const KrausChannel& b);
KrausChannel channel_power(const KrausChannel& phi, int n);

/// Haar-flavored random channel from a random isometry in -> out (x) env.
/// Deterministic in seed; requires out*env >= in.
KrausChannel random_cptp(int in_dim, int out_dim, int env_dim, std::uint64_t seed);

} // namespace qspec
