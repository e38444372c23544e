#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qctl/error.hpp"
#include "qctl/flow/model.hpp"
#include "qctl/linalg.hpp"
#include "qctl/operator.hpp"
#include "qctl/riccati/cost.hpp"
#include "qctl/riccati/ode.hpp"

namespace qctl {

enum class GainProvenance { optimal, perturbed, custom };

inline const char* to_string(GainProvenance p) {
  switch (p) {
    case GainProvenance::optimal: return "optimal";
    case GainProvenance::perturbed: return "perturbed";
    default: return "custom";
  }
}

/// Feedback u_t = (K(t) + affine(t)) U_t on the nodes of a grid.
struct GainSchedule {
  TimeGrid grid;
  std::vector<Operator> K;
  std::vector<Operator> affine;  // -R^-1 (G* r + eta*); empty when not computed
  GainProvenance provenance = GainProvenance::custom;
  std::uint64_t seed = 0;  // perturbed only
  double epsilon = 0.0;    // perturbed only
  std::optional<Operator> Pi0;  // Pi(0) of the Riccati solution the gains came from

  static GainSchedule constant(const TimeGrid& g, const Operator& k) {
    GainSchedule s;
    s.grid = g;
    s.K.assign(g.nodes(), k);
    return s;
  }

  void validate(Index dim) const {
    grid.validate();
    if (static_cast<int>(K.size()) != grid.nodes()) throw ValidationError("gain schedule: one gain per grid node");
    for (const auto& k : K) {
      if (k.dim() != dim) throw DimensionError("gain schedule: gain dimension differs from the model");
    }
    if (!affine.empty() && affine.size() != K.size()) throw ValidationError("gain schedule: affine part size");
  }
};

/// K(t) = -R^-1 G* Pi(t), affine(t) = -R^-1 (G* r(t) + eta*). r may be empty
/// (treated as zero).
inline GainSchedule feedback_gain(const RiccatiTrajectory& pi, const std::vector<Operator>& r, const CostSpec& cost,
                                  const HPModel& model) {
  model.validate();
  cost.validate();
  if (cost.dim() != model.dim()) throw DimensionError("feedback_gain: cost and model dimensions differ");
  if (static_cast<int>(pi.Pi.size()) != pi.grid.nodes()) throw ValidationError("feedback_gain: Pi is incomplete");
  if (!r.empty() && r.size() != pi.Pi.size()) throw ValidationError("feedback_gain: Pi and r are on different grids");
  const Matrix Rinv = cost.R_inverse().matrix();
  const Matrix Gs = model.G().matrix().adjoint();
  const Matrix etas = cost.eta.matrix().adjoint();
  const bool unit = Rinv.isIdentity(0.0) && Gs.isIdentity(0.0);

  GainSchedule s;
  s.grid = pi.grid;
  s.provenance = GainProvenance::optimal;
  s.Pi0 = pi.Pi.front();
  s.K.reserve(pi.Pi.size());
  s.affine.reserve(pi.Pi.size());
  for (std::size_t k = 0; k < pi.Pi.size(); ++k) {
    const Matrix& p = pi.Pi[k].matrix();
    // The unit case is written out so that K = -Pi holds bit for bit.
    s.K.emplace_back(unit ? Matrix(-p) : Matrix(-Rinv * Gs * p));
    Matrix a = etas;
    if (!r.empty()) a += Gs * r[k].matrix();
    s.affine.emplace_back(unit ? Matrix(-a) : Matrix(-Rinv * a));
  }
  return s;
}

struct SynthesizedCoupling {
  Operator L;
  double pi_residual = 0.0;         // ||L*L/2 - Pi_inf||_F
  double normality_residual = 0.0;  // ||[L, L*]||_F
};

/// L = sqrt(2) Pi_inf^{1/2} W for a unitary W commuting with Pi_inf.
inline SynthesizedCoupling synthesize_L(const Operator& Pi_inf, const std::optional<Operator>& W_in = std::nullopt,
                                        double tol = 1e-10) {
  const Operator root = psd_sqrt(Pi_inf);
  const Index n = Pi_inf.dim();
  const Operator W = W_in ? *W_in : Operator::identity(n);
  Operator::check_same_dim(Pi_inf, W, "synthesize_L");
  const Matrix& w = W.matrix();
  const double unitarity = (w.adjoint() * w - Matrix::Identity(n, n)).norm();
  if (unitarity > tol) throw DomainError("synthesize_L: W is not unitary (||W*W - I||_F = " + std::to_string(unitarity) + ")");
  const double comm = commutator(W, Pi_inf).norm();
  if (comm > tol * std::max(1.0, Pi_inf.norm())) {
    throw DomainError("synthesize_L: W does not commute with Pi_inf (||[W, Pi_inf]||_F = " + std::to_string(comm) + ")");
  }
  SynthesizedCoupling out;
  out.L = Operator(std::sqrt(2.0) * root.matrix() * w);
  const Matrix& l = out.L.matrix();
  out.pi_residual = (0.5 * l.adjoint() * l - Pi_inf.matrix()).norm();
  out.normality_residual = (l * l.adjoint() - l.adjoint() * l).norm();
  return out;
}

}  // namespace qctl
