# %% [markdown]
# # Complex-balanced equilibria and the Lyapunov function
#
# A complex-equilibrium x* has zero net flux through every complex. We find
# one, gauge the Laplacian at it, and check that the entropy-like function
# G(x) = x^T ln(x/x*) + (x* - x)^T 1 decreases along the vector field.

# %%
import numpy as np

from crnkron import fixtures as fx
from crnkron.equilibria import (
    find_complex_equilibrium,
    lyapunov_dissipation,
    lyapunov_value,
    sample_equilibrium_set,
    unique_equilibrium_in_class,
)
from crnkron.kinetics import gauge_laplacian, vector_field

net = fx.chain3()
print(net.to_dsl())

# %%
verdict = find_complex_equilibrium(net)
print("weakly reversible:", verdict.weakly_reversible)
print("complex balanced:", verdict.complex_balanced)
xstar = verdict.witness
print("x* =", xstar)
print("field at x*:", vector_field(net, xstar))

# %% [markdown]
# The gauged Laplacian has zero row sums as well as zero column sums.

# %%
g = gauge_laplacian(net, xstar)
print(g.matrix)
print("row sums:", g.matrix.sum(axis=1))

# %% [markdown]
# Every other equilibrium is x* scaled along the conserved directions.
# Within one compatibility class there is exactly one, found by Newton.

# %%
x0 = np.array([0.1, 3.0, 0.5])
x1 = unique_equilibrium_in_class(net, xstar, x0)
print("x1 =", x1, " total:", x1.sum(), "vs", x0.sum())
print("another member:", sample_equilibrium_set(net.S, xstar, [0.7]))

# %% [markdown]
# G is zero at x*, positive elsewhere, and its time derivative is never positive.

# %%
rng = np.random.default_rng(0)
for _ in range(5):
    x = xstar * np.exp(rng.uniform(-1, 1, 3))
    print(f"G = {lyapunov_value(x, xstar):.4f}   dG/dt = {lyapunov_dissipation(net, g, x):.4f}")
