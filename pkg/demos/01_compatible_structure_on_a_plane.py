"""A two-plane inside C^2, and the complex structure it inherits.

Take V = C^2 with the real inner product of R^4 and J = multiplication by
i.  The real two-plane U_r spanned by u1 = (1, 0) and u2 = (i, r) meets the
nondegeneracy condition for every r: the skew form omega(u, v) = (J u, v)
stays nonsingular on it.  The compression G of J to the plane is then
invertible and the polar-type normalization J_U = R^{-1} G with
R = (-G^2)^{1/2} is a complex structure compatible with omega.

This script walks the whole chain for a few values of r and checks the
four structure statements on a batch of random subspaces.
"""

import numpy as np

from parhodge import compat

J_AMBIENT = np.array([
    [0.0, -1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, -1.0],
    [0.0, 0.0, 1.0, 0.0],
])


def golden_plane(r):
    u1 = np.array([1.0, 0.0, 0.0, 0.0])
    u2 = np.array([0.0, 1.0, r, 0.0])
    return compat.Subspace(np.column_stack([u1, u2]))


def main():
    space = compat.AmbientSpace(q=np.eye(4), j=J_AMBIENT)

    print("== the golden family U_r = span{(1,0), (i,r)} ==")
    for r in (0.0, 0.5, 1.0, 2.0):
        sub = golden_plane(r)
        diag = compat.check_condition(space, sub)
        m, omega = compat.gram_and_omega(space, sub)
        res = compat.compatible_complex_structure(m, omega)
        s = 1.0 + r * r
        print(f"r = {r:4.1f}:  totally real: {diag['totally_real']!s:5}  "
              f"G(u1) = u2/{s:.2f}  R = I/sqrt({s:.2f})  "
              f"J(u1) = u2/sqrt({s:.2f})")
        assert np.abs(res.g[:, 0] - np.array([0.0, 1.0 / s])).max() < 1e-12
        assert np.abs(res.j[:, 0] - np.array([0.0, 1.0 / np.sqrt(s)])).max() < 1e-12
    print("   (r = 0 is the J-invariant plane: not totally real, J_U = J)")

    print("\n== the four structure statements on random subspaces ==")
    rng = np.random.default_rng(1)
    worst = {"square": 0.0, "isometry": 0.0, "symplectic": 0.0}
    taming = np.inf
    for _ in range(50):
        dim = 2 * int(rng.integers(2, 8))
        sub_dim = 2 * int(rng.integers(1, dim // 2 + 1))
        space_r, sub_r = compat.random_instance(rng, dim, sub_dim)
        m, omega = compat.gram_and_omega(space_r, sub_r)
        res = compat.compatible_complex_structure(m, omega)
        worst["square"] = max(worst["square"], res.residuals["jsq"])
        worst["isometry"] = max(worst["isometry"], res.residuals["isometry"])
        worst["symplectic"] = max(worst["symplectic"],
                                  res.residuals["omega_invariance"])
        taming = min(taming, res.residuals["taming_min_eigenvalue"])
    print(f"J^2 = -I        to {worst['square']:.2e}")
    print(f"isometry        to {worst['isometry']:.2e}")
    print(f"omega invariant to {worst['symplectic']:.2e}")
    print(f"taming min eig  {taming:.2e} > 0")


if __name__ == "__main__":
    main()
