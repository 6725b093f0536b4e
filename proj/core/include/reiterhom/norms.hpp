#pragma once

#include "reiterhom/field.hpp"
#include "reiterhom/nfunc.hpp"

namespace reiterhom::fields {

/// inf{delta > 0 : int Phi(|u| / delta) dx <= 1}, with |u| the Euclidean
/// magnitude for vector fields and the mesh's nodal quadrature.
double luxemburg_norm(const Field& u, const nfunc::NFunction& nf);

struct HolderPairing {
  double lhs = 0.0;    // |int u v dx|
  double bound = 0.0;  // 2 ||u||_Phi ||v||_Phi~
};

HolderPairing holder_pairing(const Field& u, const Field& v, const nfunc::NFunction& nf);

/// Nodal gradient of a scalar field. Central differences inside the mesh and
/// across periodic faces, second-order one-sided differences on the boundary
/// of a bounded mesh.
Field gradient(const Field& u);

}  // namespace reiterhom::fields
