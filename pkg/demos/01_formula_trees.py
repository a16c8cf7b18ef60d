#!/usr/bin/env python3
"""Walk through the formula layout machinery on a worked example.

Parses LaTeX into a layout tree, extracts hierarchical terms, computes the
complexity score, and compares two formulae by layout similarity.
"""

from femkit.tree import (
    complexity,
    extract_terms,
    layout_transition,
    parse_latex,
    parse_mathml,
    render_tree,
)

FORMULA = r"x^{2}+\frac{1}{a+b}"

print(f"formula: {FORMULA}\n")
tree = parse_latex(FORMULA)
print(render_tree(tree))

# Every non-leaf subtree contributes one original and one generalized term;
# the generalized form replaces variables with *_v and constants with *_c.
terms = extract_terms(tree)
print("\nterms (serialization, kind, level):")
for term in terms.terms:
    print(f"  {term.serialization:45s} {term.kind:12s} {term.level}")

print(f"\nlayout complexity (sum of term levels): {complexity(terms)}")

# The same tree comes out of the Presentation MathML front-end.
mathml = (
    "<math><msup><mi>x</mi><mn>2</mn></msup><mo>+</mo>"
    "<mfrac><mn>1</mn><mrow><mi>a</mi><mo>+</mo><mi>b</mi></mrow></mfrac>"
    "</math>"
)
assert parse_mathml(mathml) == tree
print("MathML front-end produced the identical tree")

# Layout similarity is directional: it normalizes by the source formula's
# term mass, so a small formula projects strongly into a larger one that
# contains it, but not the other way around.
small = extract_terms(parse_latex("a+b"))
print("\nlayout similarity:")
print(f"  small -> large: {layout_transition(terms, small):.4f}")
print(f"  large -> small: {layout_transition(small, terms):.4f}")
print(f"  self-similarity: {layout_transition(terms, terms):.4f}")
