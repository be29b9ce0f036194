# # Graph certificate
#
# Followers talk over a weighted digraph. Row i of A lists who agent i listens
# to, b_i > 0 marks agents that also see the leader. Before any gain can be
# chosen we need the left null vector w of the Laplacian and the smallest
# eigenvalue of the symmetrised, pinned matrix G.

import numpy as np

from dfd.graph import (build_graph, graph_certificate, is_strongly_connected,
                       strongly_connected_components)

# A small directed example: 1 listens to 2, 2 listens to 1 and 3, 3 listens to 1.
g = build_graph([[0, 1, 0], [0.5, 0, 1], [1, 0, 0]], b=[1, 0, 0])
print("strongly connected:", is_strongly_connected(g))

cert = graph_certificate(g)
print("L =\n", cert.L)
print("w =", cert.w, " (w^T L =", cert.w @ cert.L, ")")
print("lambda1(G) =", cert.lambda1)

# For an undirected graph w collapses to all ones and G is just L + B.
tri = build_graph(np.ones((3, 3)) - np.eye(3), b=[1, 0, 0])
print("undirected triangle w =", graph_certificate(tri).w)

# Break strong connectivity and the certificate refuses to build.
broken = build_graph([[0, 1, 0], [1, 0, 0], [0, 0, 0]], b=[1, 0, 1])
print("components:", strongly_connected_components(broken))
try:
    graph_certificate(broken)
except ValueError as exc:
    print("rejected:", exc)
