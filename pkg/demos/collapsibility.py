"""Decide collapsibility from a single source and probe it on random sentences."""
import random

from qcspkit.collapsibility import (decide_collapsible_singleton, decide_zero_collapsible,
                                    probe_collapsibility_logical, upsilon)
from qcspkit.logic import models_restricted, qcsp_to_csp, random_sentence, solve_qcsp
from qcspkit.paths import path_structure
from qcspkit.structures import Structure

DC3 = Structure(3, {"E": [(1, 2), (2, 3), (3, 1)]}).with_constants()
v = decide_collapsible_singleton(DC3, 1, 2)
print(f"DC3, source 1, p=2: {v.answer} via {v.tier}; certificate verifies={v.verify(DC3)}")

P = path_structure("1001")
v = decide_collapsible_singleton(P, 1, 1, max_m=2)
print(f"P1001, source 1, p=1: {v.answer}; missing tuple {v.counterexample}")

rng = random.Random(0)
phi = random_sentence(DC3, rng, 3, 2, 4)
omega = upsilon(3, 3, 2, [1])
print(f"\nsentence: {phi}")
print("  full truth:", solve_qcsp(DC3, phi))
print("  restricted to Upsilon(3,2,{1}):", models_restricted(DC3, phi, omega))
print("  CSP reduct satisfiable:", qcsp_to_csp(DC3, phi, omega).satisfiable(DC3))

sentences = [random_sentence(DC3, rng, 3, 3, 4) for _ in range(50)]
report = probe_collapsibility_logical(DC3, 2, [1], sentences)
print(f"  probe: {report.agreements}/{report.samples} agree")

A = Structure(2, {"E": [(1, 2), (2, 2)]})
shop = decide_zero_collapsible(A)
print(f"\n0-collapsibility of 1->2, 2->2: source {shop.source}, images {[sorted(s) for s in shop.images]}")
