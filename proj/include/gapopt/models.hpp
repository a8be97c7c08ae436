#pragma once

#include <optional>

#include "gapopt/parent_ham.hpp"
#include "gapopt/symmetry.hpp"
#include "gapopt/tensor_net.hpp"

/// Per-model glue: which tensor, block length, kernel basis and canonical S
/// belong to a (model, lambda) pair.
namespace gapopt::models {

enum class BasisChoice { kAuto, kClosedForm, kSvd };

struct ModelSpec {
  Model model = Model::kAklt;
  int n_sites = 0;  // chain sites; for random these are blocked d = 4 sites
  BasisChoice basis = BasisChoice::kAuto;
  std::optional<tn::RandomMpsFamily> family;  // required for random
};

int block_len(Model model);

tn::SiteTensor site_tensor(const ModelSpec& spec, double lambda);

/// Closed-form bases for AKLT/GHZ under kAuto, SVD for random.
ph::KernelBasis kernel_basis(const ModelSpec& spec, double lambda);

/// Canonical reference S: 1/M for AKLT and GHZ; for random MPS the
/// compression Phi^dagger h Phi / tr(...) of the pair-disentangling term,
/// whose range lies inside span(Phi).
Mat canonical_s(const ModelSpec& spec, double lambda, const ph::KernelBasis& basis);

/// Two-block (four spin-1/2) term h = O^dagger Pi O with
/// O = U^{-1} on the middle pair times P^{-1} on each block and
/// Pi = |down><down| (x) 1 + 1 (x) |down><down| on the middle pair, where
/// U = CNOT (H (x) 1)(X (x) X) maps |up up> to the singlet. Spins ordered
/// (y_j, x_{j+1}, y_{j+1}, x_{j+2}), i.e. two blocks big-endian.
Mat pair_disentangler_term(const tn::RandomMpsFamily& family, double lambda);

/// Two-qubit unitary with U |up up> = (|up down> - |down up>)/sqrt(2).
Mat singlet_preparation_unitary();

/// Normalized MPS vector on the full chain.
Vec ground_state(const ModelSpec& spec, double lambda);

}  // namespace gapopt::models
