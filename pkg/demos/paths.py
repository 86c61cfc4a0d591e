"""Classify partially reflexive paths and show the certificates behind each verdict."""
from qcspkit.clones import is_polymorphism, subpower_membership
from qcspkit.paths import binary_fy, classify_path, feder_majority, path_egp_witness, path_structure, path_verdict

for beta in ("0110", "00001110110", "1001"):
    info = classify_path(beta)
    verdict = path_verdict(beta)
    print(f"{beta:>12}: {info.kind:<18} {verdict['gap']}  QCSP with constants {verdict['complexity']}")

print("\nmajority polymorphism of 0110, row f(1, 2, -):",
      [feder_majority("0110")(1, 2, z) for z in range(1, 5)])

f = binary_fy("00001110110", 3)
print("\nbinary polymorphism for 00001110110 with y=3:")
for row in f.table.matrix():
    print("  " + " ".join(f"{v:2d}" for v in row))
print("  polymorphism:", is_polymorphism(f.table, path_structure("00001110110")))

P = path_structure("1001")
gamma = [(1, 1), (1, 2), (1, 3), (1, 4), (2, 1), (3, 1), (4, 1)]
member, _ = subpower_membership(P, gamma, (4, 4))
w = path_egp_witness("1001", 2, gamma)
print(f"\n1001: (4,4) generated by the 7 pinned tuples? {member}")
print(f"  separating sentence: {w.sentence}")
print(f"  true on all generators, false at {w.falsifier}: {w.verify()}")
