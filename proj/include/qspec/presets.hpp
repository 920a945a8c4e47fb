#pragma once

#include "qspec/capacity.hpp"
#include "qspec/channels.hpp"
#include "qspec/spectrum.hpp"

#include <string>
#include <vector>

namespace qspec::presets {

/// Diagonal state from a probability vector.
Matrix diag_state(const std::vector<double>& probs);

Matrix pauli_x();
Matrix pauli_z();

/// |Phi+><Phi+| on two qubits.
Matrix bell_state();
BipartiteFactor bell_pair();
/// |0><0| (x) |0><0|.
BipartiteFactor product_00();
/// a |Phi+><Phi+| + (1-a) |Phi-><Phi-|.
BipartiteFactor bell_mixture(double a);

/// Kraus {|0><0|, |1><1|}.
KrausChannel dephasing_qubit();
/// Fully depolarizing channel on dim (Weyl-conjugation Kraus set).
KrausChannel depolarizing(int dim);
/// Classical symmetric flip embedded in the computational basis:
/// Kraus {sqrt(1-f) I, sqrt(f) X}.
KrausChannel flip_channel(double f);

/// Uniform ensemble over the computational qubit basis states.
CQEnsemble orthogonal_qubit_ensemble();

} // namespace qspec::presets
