"""Grid refinement of the discrete operators.

1. The Galerkin right-hand sides approach an independent finite-difference
   discretization at second order.
2. The consistent-mass residual of int (m - r) . (m x m_xx) dx, zero in the
   continuum, shrinks at fourth order.
3. The winding field has nonzero slope at both ends, so the weak Laplacian
   carries O(1/h) spikes at the boundary nodes. m x m_xx vanishes in the
   interior but not there, and ||m x m_x|| / ||m x m_xx|| falls like sqrt(h).
"""
import numpy as np

import llcontrol as ll
from llcontrol.fields import smooth_field, winding_field
from llcontrol.oracle import fd_rhs

p = ll.PhysicalParams()
r1 = ll.Equilibrium.normalized([-1, 0, 1])
ladder = (12, 24, 48, 96)

print("FEM - FD difference, field control, test field C")
prev = None
for n in ladder:
    d = ll.build(n)
    m = smooth_field("C", n).nodes
    kind = ll.RhsKind("field", 0.5, r1)
    err = np.abs(ll.evaluate(d, p, kind, m).nodes - fd_rhs("field", m, d.h, p.nu, 0.5, r1.vector)).max()
    print(f"  n = {n:3d}: {err:.3e}" + (f"  ratio {prev / err:.2f}" if prev else ""))
    prev = err

print("lemma-3 residual, test field B")
prev = None
for n in ladder:
    val = abs(ll.lemma3_integral(ll.build(n), smooth_field("B", n), r1))
    print(f"  n = {n:3d}: {val:.3e}" + (f"  ratio {prev / val:.2f}" if prev else ""))
    prev = val

print("||m x m_x|| / ||m x m_xx|| for the winding field")
for n in ladder:
    print(f"  n = {n:3d}: {ll.lemma4_ratio(ll.build(n), winding_field(n)):.4f}")
