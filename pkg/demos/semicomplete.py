"""Verdicts and Hubie operations for small semicomplete digraphs."""
from qcspkit.clones import classify_operation, is_polymorphism
from qcspkit.semicomplete import (PGP, analyze_semicomplete, novi_sad, s_of_g, semicomplete_egp_witness,
                                  semicomplete_hubie, semicomplete_verdict)
from qcspkit.structures import Structure

graphs = {
    "DC3": [(1, 2), (2, 3), (3, 1)],
    "TT3": [(1, 2), (2, 3), (1, 3)],
    "two cycles": [(1, 2), (2, 3), (3, 1), (2, 4), (4, 1), (3, 4)],
}
digraphs = {name: Structure(max(max(e) for e in edges), {"E": edges}) for name, edges in graphs.items()}
digraphs["S(DC3)"] = s_of_g(digraphs["DC3"])
for name, G in digraphs.items():
    info = analyze_semicomplete(G)
    verdict = semicomplete_verdict(G)
    print(f"{name}: cycles={info.cycle_census}, sources={info.sources}, sinks={info.sinks} -> {verdict}")
    if verdict == PGP:
        h = semicomplete_hubie(G)
        tags = sorted(t for t in classify_operation(h.table) if t.startswith("hubie"))
        print(f"  {h.case} table: polymorphism={is_polymorphism(h.table, G)}, {tags}")
    elif novi_sad(G) is None:
        print("  no Novi Sad pair, so no separating witness is built")
    else:
        w = semicomplete_egp_witness(G, 2)
        print(f"  EGP witness over {w.p},{w.q}: falsifier {w.falsifier}, verifies={w.verify()}")
