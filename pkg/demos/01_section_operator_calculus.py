#!/usr/bin/env python3
# Build the model section operator, take its square-root generator, and
# watch the semigroup behave: contractive, monotone, exactly a semigroup.

import numpy as np

import bitrans as bt

m, length = 8, 1.0
op = bt.build_dirichlet_laplacian_1d(m, length)
print(f"section operator: {op.label}")
print("eigenvalues (nondecreasing):")
print(np.array2string(op.eigenvalues, precision=4))

# closed form for the tridiagonal stencil
h = length / (m + 1)
k = np.arange(1, m + 1)
closed = np.sort(-(4.0 / h**2) * np.sin(k * np.pi / (2 * (m + 1))) ** 2)
print("max relative gap to the closed form:",
      np.max(np.abs(op.eigenvalues - closed) / np.abs(closed)))

gen = bt.square_root_generator(op)
print("\ngenerator eigenvalues m_j = -sqrt(-mu_j):")
print(np.array2string(gen.eigenvalues, precision=4))
print("||M^2 + A|| / ||A|| =",
      np.linalg.norm(gen.matrix @ gen.matrix + op.matrix, 2)
      / np.linalg.norm(op.matrix, 2))

print("\nsemigroup norms (must decrease from 1):")
for t in (0.0, 0.05, 0.2, 1.0, 5.0):
    print(f"  ||exp({t:4.2f} M)||_2 = {np.linalg.norm(bt.semigroup(gen, t).matrix, 2):.6e}")

law = np.linalg.norm(bt.semigroup(gen, 0.3).matrix @ bt.semigroup(gen, 0.7).matrix
                     - bt.semigroup(gen, 1.0).matrix, 2)
print("semigroup law gap |e^{0.3M} e^{0.7M} - e^M| =", law)

# arbitrary spectral functions commute because they share one eigenbasis
f = bt.apply_function(op, lambda mu: np.exp(-np.sqrt(-mu)))
g = bt.apply_function(op, lambda mu: 1.0 / mu)
comm = np.linalg.norm(f.matrix @ g.matrix - g.matrix @ f.matrix, 2)
print("commutator of two operator functions:", comm)
