#pragma once

#include <Eigen/Dense>

#include "kssl/errors.hpp"

namespace kssl::losses {

// d×n matrix whose column i is the representation of view i of point i.
using RepresentationMatrix = Eigen::MatrixXd;

// Which loss a trainer run optimizes. Vicreg uses the squared-variance term,
// VicregOriginal the hinge-on-standard-deviation term.
enum class LossKind { Vicreg, VicregOriginal, BarlowTwins, Scl };

enum class VarianceMode { Variance, StdHinge };

// Weights of the three VICReg terms plus the variance-term shape.
// epsilon is only read in StdHinge mode.
struct VicregWeights {
  double lambda = 5.0;
  double mu = 5.0;
  double nu = 1.0;
  VarianceMode variance_mode = VarianceMode::Variance;
  double epsilon = 1e-4;
};

// λ·s(Z,Z') + μ·[v(Z)+v(Z')] + ν·[c(Z)+c(Z')] with
//   s = (1/n)Σ‖z_i−z'_i‖²,
//   v = (1/d)Σ_i (1−cov_ii)²           (Variance mode)
//     = (1/d)Σ_i max(0, 1−√(cov_ii+ε)) (StdHinge mode),
//   c = (1/d)Σ_{i≠j} cov_ij².
double loss_vicreg(const RepresentationMatrix& Z,
                   const RepresentationMatrix& Zp, const VicregWeights& w);

// Σ_i (1−𝒞_ii)² + λ·Σ_{i≠j} offdiag(𝒞_ij) over the symmetrized unnormalized
// cross-correlation 𝒞 = (1/2n)(ZZ'ᵀ + Z'Zᵀ). The default off-diagonal term is
// (1−𝒞_ij)²; squared_offdiag switches it to the common 𝒞_ij² form, whose zero
// set is 𝒞 = I (the form the trainer optimizes).
double loss_barlow_twins(const RepresentationMatrix& Z,
                         const RepresentationMatrix& Zp, double lambda,
                         bool squared_offdiag = false);

// (1/n²)Σ_{i≠j}(z_iᵀz'_j)² − (2/n)Σ_i z_iᵀz'_i + (1/2n²)Σ_i(‖z_i‖⁴+‖z'_i‖⁴).
// Bounded below by −d, with equality iff Z = Z' and (1/n)ZZᵀ = I.
double loss_scl(const RepresentationMatrix& Z, const RepresentationMatrix& Zp);

// Exact optimality test for the chosen loss, used as an oracle against the
// numeric loss values:
//   Vicreg/VicregOriginal: Z = Z' and cov(Z) = I;
//   Scl:                   Z = Z' and (1/n)ZZᵀ = I;
//   BarlowTwins:           𝒞 equals the all-ones matrix (the zero set of the
//                          default off-diagonal form above).
// Comparisons are entrywise within tol.
bool zero_loss_conditions(LossKind kind, const RepresentationMatrix& Z,
                          const RepresentationMatrix& Zp, double tol = 1e-8);

}  // namespace kssl::losses
