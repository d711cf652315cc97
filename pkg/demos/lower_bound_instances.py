"""Build the code-based instance for each case row and compare the join with the codebook.

Rows 1 and 4 reproduce exactly.  For rows 2, 3 and 5 the edge projections of
the Reed-Solomon code already fill the whole q x q grid, so the join is larger
than the code.  Row 6 gets the code as its join but its relations exceed N.
"""

from joincover.codes import join_equals_codebook, join_size_upto, lower_bound_instance
from joincover.core import Hypergraph, cycle

TRI_STAR = Hypergraph(6, [(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (5,)])
CASES = [
    ("C4", cycle(4), 29, 4),
    ("C4", cycle(4), 9, 3),
    ("C4", cycle(4), 400, 2),
    ("two edges", Hypergraph(4, [(0, 1), (2, 3)]), 29, 2),
    ("triangle+star+loop", TRI_STAR, 25, 2),
    ("triangle+star+loop", TRI_STAR, 16, 1),
]


def main():
    print("graph\tN\tdelta\trow\tq\t|C|\t|J|\tmax|R_e|\tjoin=code")
    for name, g, N, delta in CASES:
        lb = lower_bound_instance(g, N, delta)
        c = lb.codebook
        j = join_size_upto(lb.instance, c.size)
        jt = str(j) if j <= c.size else f">{c.size}"
        rmax = max(len(r) for r in lb.instance.relations)
        print(f"{name}\t{N}\t{delta}\t{lb.row}\t{lb.q}\t{c.size}\t{jt}\t{rmax}\t{join_equals_codebook(lb.instance, c)}")


if __name__ == "__main__":
    main()
