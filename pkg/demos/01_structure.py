# %% [markdown]
# # Network structure
#
# Parse a small network from the text format, look at its complex matrix Z,
# incidence matrix B and stoichiometric matrix S = ZB, and compute the
# deficiency and conserved quantities.

# %%
import numpy as np

from crnkron import build_structure, parse_network

text = """
# two species bind; the product rearranges and decays back
X1 + 2 X2 <-> X3 ; kf = 1, kr = 1
X3 -> 2 X1 + X2  ; k = 1
2 X1 + X2 -> X4  ; k = 1
X3 -> X4         ; k = 1
X4 -> X3         ; k = 1
"""
net = parse_network(text)
print(net.species)
print(net.complex_names)

# %% [markdown]
# Each column of Z is a complex. B has one column per reaction, -1 at the
# substrate complex and +1 at the product.

# %%
print("Z =\n", net.Z)
print("B =\n", net.B)
print("S =\n", net.S)

# %% [markdown]
# The deficiency is rank B - rank S. Zero deficiency means distinct reactions
# cannot cancel in species space. The left kernel of S holds the conserved
# moieties; when it contains a strictly positive vector we also report an
# integer mass vector.

# %%
info = build_structure(net)
print("linkage classes:", info.linkage_classes)
print("rank B =", info.rank_B, " rank S =", info.rank_S, " deficiency =", info.deficiency)
print("mass vector:", info.mass_vector)
print("Z^T u =", net.Z.T @ info.mass_vector)

# %% [markdown]
# A network without a positive conservation law, for contrast.

# %%
growth = parse_network("A -> 2A ; k = 1\n2A -> A ; k = 1")
g = build_structure(growth)
print("moieties:", g.moiety_basis.shape[1], " mass vector:", g.mass_vector)
