#ifndef ZETAFLOW_SUSPENSION_HPP
#define ZETAFLOW_SUSPENSION_HPP

// Suspension flows over a subshift with a strictly positive roof, flow
// observables polynomial in the fiber coordinate, and the lifting map that
// turns a flow observable K into a shift function k.

#include <optional>

#include "zetaflow/thermo.hpp"

namespace zf {

struct LatticeReport {
  bool conclusive = false;
  bool lattice = false;
  double span = 0;       // generator of the detected length lattice
  int lengths_used = 0;
};

// Real-gcd test on prime-orbit lengths up to p_max (at most 50 of them,
// tolerance 1e-9).  Labels, never rejects: experiments carry the flag.
LatticeReport detect_lattice(const Subshift& shift, const CylinderFunction& roof, int p_max);

// K(x, u) = sum_j coeffs[j](x) u^j on the fiber 0 <= u < r(x).
struct FlowObservable {
  std::vector<CylinderFunction> coeffs;
  double alpha0 = 1.0;  // declared regularity (1 for this class)

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

struct LiftedObservable {
  CylinderFunction k;
  double sup_k = 0;
  double bound = 0;  // ||r||_sup * sup|K|
};

struct ObservableNorms {
  double sup_K = 0;
  double sup_k = 0;
  double bound = 0;
};

// Exact fiber integral of the polynomial class:
//   k(x) = sum_j c_j(x) r(x)^{j+1} / (j+1).
LiftedObservable lift(const FlowObservable& K, const CylinderFunction& roof);

// sup|K| over words and fiber (closed form for degree <= 2, dense sampling
// with refinement otherwise), plus the lifting inequality data.
ObservableNorms observable_norms(const FlowObservable& K, const CylinderFunction& k,
                                 const CylinderFunction& roof);

// A normalized suspension: roof, potential, the flow-pressure constant c with
// P(psi - c r) = 0, and a lattice label.
class SuspensionSystem {
 public:
  SuspensionSystem(Subshift base, CylinderFunction psi, CylinderFunction roof,
                   int lattice_scan_pmax = 8);

  const Subshift& base() const { return base_; }
  const CylinderFunction& psi() const { return psi_; }
  const CylinderFunction& roof() const { return roof_; }
  double c() const { return norm_.c; }
  const NormalizationResult& normalization() const { return norm_; }
  const LatticeReport& lattice() const { return lattice_; }
  double r_min() const { return roof_.r_min(); }

 private:
  Subshift base_;
  CylinderFunction psi_, roof_;
  NormalizationResult norm_;
  LatticeReport lattice_;
};

// Depth-one presentation of (psi, roof[, k]): edge data for transfer-matrix
// work, jointly recoded when any depth exceeds 2.
struct EdgeSystem {
  Subshift shift;
  CylinderFunction psi;
  CylinderFunction roof;
  std::optional<CylinderFunction> k;
};

EdgeSystem edge_presentation(const SuspensionSystem& sys, const CylinderFunction* k);

}  // namespace zf

#endif
