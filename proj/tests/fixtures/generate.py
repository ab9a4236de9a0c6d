#!/usr/bin/env python3
"""Regenerates the test fixtures.

Hand-written expectations (edge list, stats, prompts, parser answers, bench
accuracy schedules) live in this file and are written next to the inputs.
Files that depend on the cleaner's exact output (nodes.jsonl, the embedding
table) are produced by running the built tool, after checking the edges and
stats it emits against the hand-written ones.

usage: generate.py --kgprove build/tools/kgprove
"""

import argparse
import hashlib
import json
import pathlib
import random
import subprocess
import sys
import tempfile

HERE = pathlib.Path(__file__).resolve().parent

# ---------------------------------------------------------------------------
# Wiki dump: 12 pages, 10 of them in content namespaces.

PAGES = [
    ("Definition:Group", 100, """A '''group''' is a [[Definition:Semigroup|semigroup]] $\\struct {G, \\circ}$ with an [[Definition:Identity Element|identity element]] in which every element has an [[Definition:Inverse Element|inverse]].<ref>{{BookReference|Abstract Algebra|1990|A. Author}}</ref>
{{refactor}}
The conditions are collected in the [[Axiom:Group Axioms|group axioms]].

== Also see ==
* [[Definition:Subgroup]]

== Sources ==
* {{BookReference|Topics in Algebra|1975|I.N. Herstein}}

[[Category:Definitions/Group Theory]]"""),
    ("Talk:Definition:Group", 1, "Should this mention [[Definition:Monoid]]? ~~~~"),
    ("Definition:Identity Element", 100, """Let $\\struct {S, \\circ}$ be an [[Definition:Algebraic Structure|algebraic structure]].
An element $e \\in S$ is an '''identity element''' {{iff}} $\\forall a \\in S: a \\circ e = a = e \\circ a$.<!-- see also [[Definition:Magma]] -->

In a [[Definition:Group|group]] the identity is unique: see [[Identity of Group is Unique]].

[[Category:Definitions/Identity Elements]]"""),
    ("Definition:Inverse Element", 100, """Let $\\struct {S, \\circ}$ be a [[Definition:Monoid|monoid]] whose [[Definition:Identity_Element|identity]] is $e$.
An element $y$ is an '''inverse''' of $x$ {{iff}} $x \\circ y = e = y \\circ x$.
This is also written with [[Definition:Identity Element|identity]] notation."""),
    ("User:Alice", 2, "I mostly edit [[Definition:Group|group]] pages."),
    ("Definition:Subgroup", 100, """Let $\\struct {G, \\circ}$ be a [[Definition:Group|group]].
A '''subgroup''' of $G$ is a [[Definition:Subset|subset]] $H$ that is itself a group under $\\circ$.
Compare [[Definition:Subgroup|this page]] with its generalisations."""),
    ("Axiom:Group Axioms", 102, """A [[Definition:Group|group]] $\\struct {G, \\circ}$ satisfies:
* closure
* associativity
* existence of an identity
* existence of inverses"""),
    ("Identity of Group is Unique", 0, """== Theorem ==
Let $\\struct {G, \\circ}$ be a [[Definition:Group|group]].
Then the [[Definition:Identity Element|identity]] of $G$ is unique.

== Proof ==
{{:Identity of Group is Unique/Proof 1}}

[[Category:Group Theory]]"""),
    ("Identity of Group is Unique/Proof 1", 0, """Suppose $e$ and $f$ are both identities, and aim for [[Proof by Contradiction|a contradiction]] if $e \\ne f$.
By the [[Axiom:Group Axioms|group axioms]], $e = e \\circ f = f$.
This uses [[Inverse of Group Element is Unique]] only in passing.
The notion of [[Definition:Identity Element|identity]] is all that is needed.
{{qed}}"""),
    ("Inverse of Group Element is Unique", 0, """== Theorem ==
Let $\\struct {G, \\circ}$ be a [[Definition:Group|group]].
Every element of $G$ has exactly one [[Definition:Inverse Element|inverse]]."""),
    ("Inverse of Group Element is Unique/Proof 1", 0, """Let $y, z$ both be inverses of $x$.
Similarly to [[Identity of Group is Unique/Proof 1]], compute $y = y \\circ e = y \\circ \\paren {x \\circ z} = \\paren {y \\circ x} \\circ z = z$ using [[Axiom:Group Axioms|associativity]].
Here [[Inverse of Group Element is Unique/Proof 1|this proof]] is self-contained.
A missing lemma: [[Cancellation Law]].
{{qed}}"""),
    ("Proof by Contradiction", 0, """'''Proof by Contradiction''' is the [[Definition:Proof Technique|proof technique]] of deriving a falsehood from the negation of the goal."""),
]

NAMESPACES = [(0, ""), (1, "Talk"), (2, "User"), (100, "Definition"), (102, "Axiom"), (104, "Proof")]

# Node ids are dense in page order over kept pages.
NODE_TITLES = [t for t, ns, _ in PAGES if ns in (0, 100, 102)]
ID = {t: i for i, t in enumerate(NODE_TITLES)}

# Hand-traced from the page texts above: links in node order, then link
# order; sections "Also see"/"Sources" and comments removed before linking.
EXPECTED_EDGES = [
    ("Definition:Group", "Definition:Identity Element", "RELATED_DEFINITION"),
    ("Definition:Group", "Definition:Inverse Element", "RELATED_DEFINITION"),
    ("Definition:Group", "Axiom:Group Axioms", "USES_AXIOM"),
    ("Definition:Identity Element", "Definition:Group", "RELATED_DEFINITION"),
    ("Definition:Identity Element", "Identity of Group is Unique", "LINK"),
    ("Definition:Inverse Element", "Definition:Identity Element", "RELATED_DEFINITION"),
    ("Definition:Subgroup", "Definition:Group", "RELATED_DEFINITION"),
    ("Axiom:Group Axioms", "Definition:Group", "LINK"),
    ("Identity of Group is Unique", "Definition:Group", "USES_DEFINITION"),
    ("Identity of Group is Unique", "Definition:Identity Element", "USES_DEFINITION"),
    ("Identity of Group is Unique/Proof 1", "Proof by Contradiction", "PROOF_TECHNIQUE"),
    ("Identity of Group is Unique/Proof 1", "Axiom:Group Axioms", "USES_AXIOM"),
    ("Identity of Group is Unique/Proof 1", "Inverse of Group Element is Unique", "PROOF_DEPENDENCY"),
    ("Identity of Group is Unique/Proof 1", "Definition:Identity Element", "USES_DEFINITION"),
    ("Inverse of Group Element is Unique", "Definition:Group", "USES_DEFINITION"),
    ("Inverse of Group Element is Unique", "Definition:Inverse Element", "USES_DEFINITION"),
    ("Inverse of Group Element is Unique/Proof 1", "Identity of Group is Unique/Proof 1", "SIMILAR_PROOF"),
    ("Inverse of Group Element is Unique/Proof 1", "Axiom:Group Axioms", "USES_AXIOM"),
]

# Dangling: Semigroup, Algebraic Structure, Monoid, Subset, Cancellation Law,
# Proof Technique. Self: Subgroup, Inverse proof. Duplicate: Inverse Element
# -> Identity Element.
EXPECTED_STATS = {
    "pages_seen": 12,
    "pages_kept": 10,
    "edges_kept": 18,
    "edges_dropped_dangling": 6,
    "edges_dropped_self": 2,
    "edges_dropped_duplicate": 1,
    "pages_dropped_namespace": 2,
    "pages_skipped_untitled": 0,
    "redirects": 0,
}


def xml_escape(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_dump(path):
    out = ['<mediawiki xmlns="http://www.mediawiki.org/xml/export-0.11/" version="0.11" xml:lang="en">',
           "  <siteinfo>", "    <sitename>ProofWiki</sitename>", "    <namespaces>"]
    for key, name in NAMESPACES:
        if name:
            out.append(f'      <namespace key="{key}" case="first-letter">{name}</namespace>')
        else:
            out.append(f'      <namespace key="{key}" case="first-letter" />')
    out += ["    </namespaces>", "  </siteinfo>"]
    for i, (title, ns, text) in enumerate(PAGES):
        out += ["  <page>", f"    <title>{xml_escape(title)}</title>", f"    <ns>{ns}</ns>", f"    <id>{1000 + i}</id>",
                "    <revision>", f"      <id>{5000 + i}</id>", "      <model>wikitext</model>",
                f'      <text bytes="{len(text.encode())}" xml:space="preserve">{xml_escape(text)}</text>',
                "    </revision>", "  </page>"]
    out.append("</mediawiki>")
    path.write_text("\n".join(out) + "\n", encoding="utf-8")


def expected_edges_csv():
    lines = ["from_id,to_id,type"]
    for a, b, t in EXPECTED_EDGES:
        lines.append(f"{ID[a]},{ID[b]},{t}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Embeddings (dimension 8). Axes: group, identity, inverse, subgroup, axiom,
# technique, uniqueness, misc.

DIM = 8
NODE_AXES = {
    "Definition:Group": {0: 1.0, 3: 0.2},
    "Definition:Identity Element": {1: 1.0, 0: 0.3},
    "Definition:Inverse Element": {2: 1.0, 0: 0.3},
    "Definition:Subgroup": {3: 1.0, 0: 0.5},
    "Axiom:Group Axioms": {4: 1.0, 0: 0.6},
    "Identity of Group is Unique": {1: 0.8, 6: 0.8, 0: 0.3},
    "Identity of Group is Unique/Proof 1": {1: 0.7, 6: 0.6, 5: 0.3},
    "Inverse of Group Element is Unique": {2: 0.8, 6: 0.8, 0: 0.3},
    "Inverse of Group Element is Unique/Proof 1": {2: 0.7, 6: 0.6, 4: 0.3},
    "Proof by Contradiction": {5: 1.0, 7: 0.3},
}

KEYWORDS = [("group", 0), ("identity", 1), ("inverse", 2), ("subgroup", 3), ("associativ", 4),
            ("axiom", 4), ("contradiction", 5), ("unique", 6)]


def vector_from_axes(axes, rng):
    v = [rng.uniform(0.01, 0.05) for _ in range(DIM)]
    for axis, w in axes.items():
        v[axis] += w
    return [round(x, 6) for x in v]


def statement_vector(text, rng):
    lower = text.lower()
    axes = {}
    for word, axis in KEYWORDS:
        if word in lower:
            axes[axis] = axes.get(axis, 0.0) + 1.0
    if not axes:
        axes[7] = 1.0
    return vector_from_axes(axes, rng)


def sha(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Dataset: 20 problems. A few use the alias keys real datasets carry.

HEADER = "import Mathlib\nimport Aesop\n\nset_option maxHeartbeats 400000\n\nopen BigOperators Real Nat Topology Rat\n"

STATEMENTS = [
    ("the identity element of a group is unique", "(G : Type*) [Group G] (e : G) (h : ∀ a : G, e * a = a) : e = 1"),
    ("every element of a group has a unique inverse", "(G : Type*) [Group G] (a b : G) (h : a * b = 1) : b = a⁻¹"),
    ("the inverse of the inverse of a group element is the element", "(G : Type*) [Group G] (a : G) : a⁻¹⁻¹ = a"),
    ("in a group, left cancellation holds", "(G : Type*) [Group G] (a b c : G) (h : a * b = a * c) : b = c"),
    ("the inverse of a product is the product of inverses in reverse order", "(G : Type*) [Group G] (a b : G) : (a * b)⁻¹ = b⁻¹ * a⁻¹"),
    ("the identity of a group is its own inverse", "(G : Type*) [Group G] : (1 : G)⁻¹ = 1"),
    ("a subgroup contains the identity of the group", "(G : Type*) [Group G] (H : Subgroup G) : (1 : G) ∈ H"),
    ("a subgroup is closed under taking inverses", "(G : Type*) [Group G] (H : Subgroup G) (a : G) (h : a ∈ H) : a⁻¹ ∈ H"),
    ("group multiplication is associative by the group axioms", "(G : Type*) [Group G] (a b c : G) : a * b * c = a * (b * c)"),
    ("if a squared equals the identity for all a then the group is commutative", "(G : Type*) [Group G] (h : ∀ a : G, a * a = 1) (a b : G) : a * b = b * a"),
    ("right cancellation holds in every group", "(G : Type*) [Group G] (a b c : G) (h : b * a = c * a) : b = c"),
    ("the equation a x = b has a unique solution in a group", "(G : Type*) [Group G] (a b : G) : ∃! x : G, a * x = b"),
    ("an element equal to its own square is the identity", "(G : Type*) [Group G] (a : G) (h : a * a = a) : a = 1"),
    ("the intersection of two subgroups is a subgroup containing the identity", "(G : Type*) [Group G] (H K : Subgroup G) : (1 : G) ∈ H ⊓ K"),
    ("conjugation by a fixes the identity", "(G : Type*) [Group G] (a : G) : a * 1 * a⁻¹ = 1"),
    ("the square of an inverse is the inverse of the square", "(G : Type*) [Group G] (a : G) : a⁻¹ * a⁻¹ = (a * a)⁻¹"),
    ("by contradiction, no element other than the identity acts trivially", "(G : Type*) [Group G] (e : G) (h : ∀ a : G, a * e = a) : e = 1"),
    ("two is less than three", "2 < 3"),
    ("the sum of the first n odd numbers is n squared", "(n : ℕ) : ∑ i in Finset.range n, (2 * i + 1) = n ^ 2"),
    ("zero times any natural number is zero", "(n : ℕ) : 0 * n = 0"),
]


def problem_name(i):
    return f"fixture_p{i:02d}"


def dataset_rows():
    rows = []
    for i, (stmt, sig) in enumerate(STATEMENTS, start=1):
        name = problem_name(i)
        informal = stmt[0].upper() + stmt[1:] + "."
        row = {"name": name, "split": "test", "informal_statement": informal, "header": HEADER,
               "informal_prefix": f"/-- {informal} -/\n", "formal_statement": f"theorem {name} {sig} := by\n",
               "goal": None}
        if i == 5:
            row["informal_stmt"] = row.pop("informal_statement")
        if i == 6:
            row["nl_statement"] = row.pop("informal_statement")
        if i == 7:
            del row["informal_statement"]  # recovered from the prefix doc comment
        if i == 8:
            row = {"id": row.pop("name"), **row}
            row["source"] = "synthetic"
        if i == 12:
            row["goal"] = "⊢ ∃! x, a * x = b"
        rows.append((name, informal, row))
    return rows


# ---------------------------------------------------------------------------
# Mock scripts per method. WINS maps problem index to the winning attempt.

R = 3
WINS = {
    "base": {1: 1, 2: 1, 3: 2, 4: 3},
    "rag": {1: 1, 2: 1, 5: 1, 3: 2, 6: 2, 4: 3, 7: 3},
    "graph": {1: 1, 2: 1, 5: 1, 8: 1, 3: 2, 6: 2, 9: 2, 4: 3, 7: 3, 10: 3, 11: 3},
}
EMPTY_INFORMAL = 18  # informal proof always empty: classified "other"
NO_CODE = 20         # formalizer never emits a code block: "model_error"
TIMEOUT_AT = (17, 2)  # (problem, attempt) whose check times out


def expected_summary_numbers(method):
    n = len(STATEMENTS)
    wins = WINS[method]
    by_attempt = [sum(1 for a in wins.values() if a <= t) / n for t in range(1, R + 1)]
    hist = {"formalization_gap": 0, "missing_knowledge": 0, "model_error": 0, "other": 0}
    for i in range(1, n + 1):
        if i in wins:
            continue
        if i == NO_CODE:
            hist["model_error"] += 1
        elif i == EMPTY_INFORMAL:
            hist["other"] += 1
        else:
            hist["formalization_gap"] += 1
    return {"accuracy": len(wins) / n, "accuracy_by_attempt": by_attempt, "failure_histogram": hist,
            "verified": sorted(problem_name(i) for i in wins)}


def lean_code(name, sig, method, attempt, i):
    body = "  simp" if attempt == 1 else ("  group" if attempt == 2 else "  aesop")
    code = f"theorem {name} {sig} := by\n{body}"
    if i % 3 == 0:
        code = "import Mathlib\n\n" + code  # re-emitted header import
    return code


def formalize_response(code, i, attempt):
    if (i + attempt) % 4 == 0:
        return f"```lean4\n{code}\n```"
    if (i + attempt) % 4 == 1:
        return f"Here is the formalization.\n\n# Start\n```lean4\n{code}\n```\n# End\n"
    return f"# Start\n```lean4\n{code}\n```\n# End"


def verifier_error(name, attempt):
    line = 9 + attempt
    return (f"/tmp/ws/Main.lean:{line}:2: error: unsolved goals\n"
            f"G : Type u_1\ninst✝ : Group G\n⊢ goal for {name}\n"
            f"/tmp/ws/Main.lean:{line}:4: warning: unused variable `h`\n")


def mock_scripts(method, rows):
    wins = WINS[method]
    chat, verifier = [], []
    for i, (name, informal, row) in enumerate(rows, start=1):
        sig = STATEMENTS[i - 1][1]
        used = wins.get(i, R)
        calls = 0
        for t in range(1, used + 1):
            if i == EMPTY_INFORMAL:
                text = "Informal Proof:\n"
            else:
                text = (f"We work from the definitions.\n\nInformal Proof:\n"
                        f"({method}, attempt {t}) {informal} follows from the group axioms applied to each side.")
            chat.append({"problem_id": name, "template_id": "informal", "turn": t, "response_text": text})
            if i == NO_CODE:
                resp = "I am unable to produce Lean code for this statement."
            else:
                resp = formalize_response(lean_code(name, sig, method, t, i), i, t)
            chat.append({"problem_id": name, "template_id": "formalize", "turn": t, "response_text": resp})
            if i == NO_CODE:
                continue
            calls += 1
            if wins.get(i) == t:
                verifier.append({"problem_id": name, "attempt": calls, "status": "verified", "raw_output": ""})
            elif (i, t) == TIMEOUT_AT:
                verifier.append({"problem_id": name, "attempt": calls, "status": "timeout", "raw_output": ""})
            else:
                verifier.append({"problem_id": name, "attempt": calls, "status": "failed",
                                 "raw_output": verifier_error(name, t)})
    return chat, verifier


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")


# ---------------------------------------------------------------------------
# Response-shape corpus for the parsers.

LEAN_CASES = [
    ("exact_format", "# Start\n```lean4\ntheorem t : 1 + 1 = 2 := rfl\n```\n# End", "theorem t : 1 + 1 = 2 := rfl"),
    ("bare_fence", "```\ntheorem t : True := trivial\n```", "theorem t : True := trivial"),
    ("lean_tag", "```lean\nexample : 2 = 2 := rfl\n```", "example : 2 = 2 := rfl"),
    ("prose_around", "Here is the proof:\n```lean4\ntheorem t : True := by\n  trivial\n```\nHope this helps.",
     "theorem t : True := by\n  trivial"),
    ("lean_preferred_over_untagged", "```\nnot the answer\n```\n```lean4\ntheorem t : True := trivial\n```",
     "theorem t : True := trivial"),
    ("first_lean_wins", "```lean4\ntheorem a : True := trivial\n```\n```lean4\ntheorem b : True := trivial\n```",
     "theorem a : True := trivial"),
    ("unterminated", "# Start\n```lean4\ntheorem t : True := by\n  trivial\n", "theorem t : True := by\n  trivial"),
    ("unterminated_with_end_marker", "```lean4\ntheorem t : True := trivial\n\n# End\n", "theorem t : True := trivial"),
    ("crlf", "```lean4\r\ntheorem t : True := trivial\r\n```\r\n", "theorem t : True := trivial"),
    ("indented_fence", "  ```lean4\n  theorem t : True := trivial\n  ```", "  theorem t : True := trivial"),
    ("trailing_whitespace", "```lean4\ntheorem t : True := trivial   \n\n```", "theorem t : True := trivial"),
    ("uppercase_tag", "```Lean4\ntheorem t : True := trivial\n```", "theorem t : True := trivial"),
    ("python_only", "```python\nprint(1)\n```", None),
    ("missing_block", "I cannot formalize this statement.", None),
    ("empty_block", "```lean4\n\n```", None),
]

JUDGE_CASES = [
    ("plain", "The argument is sound.\nSCORE: 7", 7, 0, "The argument is sound."),
    ("bold_out_of_ten", "Clear and complete.\n\n**Score:** 9/10", 9, 0, "Clear and complete."),
    ("clamped_high", "Flawless beyond measure.\nSCORE: 14", 10, 1, "Flawless beyond measure."),
    ("clamped_negative", "Wrong.\nSCORE: -3", 0, 1, "Wrong."),
    ("fractional", "Mostly right.\nSCORE: 7.6", 8, 1, "Mostly right."),
    ("last_line_wins", "First pass.\nSCORE: 3\nOn reflection it is better.\nSCORE: 8", 8, 0,
     "First pass.\nSCORE: 3\nOn reflection it is better."),
    ("equals_lowercase", "ok\nscore = 5", 5, 0, "ok"),
    ("trailing_period", "Good.\nSCORE: 6.", 6, 0, "Good."),
    ("missing_score", "I like this proof a lot.", None, 0, None),
    ("score_in_prose_only", "My score would be high.\nNo number given.", None, 0, None),
]


def response_corpus():
    rows = []
    for name, resp, code in LEAN_CASES:
        row = {"name": name, "kind": "lean", "response": resp}
        row["expected"] = {"code": code} if code is not None else {"error": True}
        rows.append(row)
    for name, resp, score, warnings, just in JUDGE_CASES:
        row = {"name": name, "kind": "judge", "response": resp}
        row["expected"] = ({"score": score, "warnings": warnings, "justification": just}
                           if score is not None else {"error": True})
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Golden prompts, written out literally.

PROMPT_PROBLEM = {"name": "prompt_demo", "informal_statement": "Show that the identity of a group is unique.",
                  "header": "import Mathlib\n", "informal_prefix": "/-- Identity is unique. -/\n",
                  "formal_statement": "theorem demo (G : Type*) [Group G] (e : G) (h : ∀ a, e * a = a) : e = 1 := by",
                  "goal": "⊢ e = 1", "split": "test"}
PROMPT_CONTEXT = "## Definition:Group\nA group is a monoid in which every element is invertible."
PROMPT_INFORMAL_PROOF = "Let f = 1. Then e = e * f = f."
PROMPT_FEEDBACK = "The previous Lean code failed to compile with these errors:\n\n- line 3:2: unsolved goals\n  > exact h"

INFORMAL_GOLDEN = (
    "You are a mathematics expert focused on\n"
    "generating clear informal proofs.\n"
    "\n"
    "Given the following mathematical problem\n"
    "and context, generate a clear and detailed\n"
    "informal proof in natural language.\n"
    "\n"
    f"Context: {PROMPT_CONTEXT}\n"
    "\n"
    f"Problem: {PROMPT_PROBLEM['informal_statement']}\n"
    "\n"
    "Provide your proof in the following format:\n"
    "\n"
    "Informal Proof:\n"
    "[Your proof here]")

INFORMAL_EMPTY_GOLDEN = INFORMAL_GOLDEN.replace(f"Context: {PROMPT_CONTEXT}", "Context: (none)")

FORMAL_GOLDEN = (
    "You are a Lean 4 code generator.\n"
    "We have:\n"
    "HEADER:\n"
    f"{PROMPT_PROBLEM['header']}\n"
    "\n"
    "INFORMAL PROOF:\n"
    f"{PROMPT_INFORMAL_PROOF}\n"
    "\n"
    "PREFIX:\n"
    f"{PROMPT_PROBLEM['informal_prefix']}\n"
    "\n"
    "STATEMENT:\n"
    f"{PROMPT_PROBLEM['formal_statement']}\n"
    "\n"
    "GOAL (optional):\n"
    f"{PROMPT_PROBLEM['goal']}\n"
    "\n"
    "INSTRUCTIONS:\n"
    "1. Output exactly one triple-backtick code\n"
    "block containing valid Lean 4 code.\n"
    "2. Do not include any text or explanations\n"
    "outside the code block.\n"
    "3. Make sure it compiles in Lean 4.\n"
    "\n"
    "Required Format:\n"
    "# Start\n"
    "```lean4\n"
    "<Lean code here>\n"
    "```\n"
    "# End")

FORMAL_FEEDBACK_GOLDEN = FORMAL_GOLDEN + "\n\n" + PROMPT_FEEDBACK

JUDGE_GOLDEN = (
    "You are a rigorous judge of mathematical proofs.\n"
    "\n"
    "Evaluate the candidate proof of the problem below across the dimensions of\n"
    "mathematical correctness, clarity, and reasoning completeness.\n"
    "\n"
    f"Problem: {PROMPT_PROBLEM['informal_statement']}\n"
    "\n"
    "Candidate Proof:\n"
    f"{PROMPT_INFORMAL_PROOF}\n"
    "\n"
    "Assign an integer score from 0 (worthless) to 10 (flawless) and justify it\n"
    "briefly. End your answer with a final line of exactly this form:\n"
    "SCORE: <n>")


def write_prompts(d):
    d.mkdir(parents=True, exist_ok=True)
    (d / "problem.json").write_text(json.dumps(PROMPT_PROBLEM, ensure_ascii=False) + "\n", encoding="utf-8")
    inputs = {"context": PROMPT_CONTEXT, "informal_proof": PROMPT_INFORMAL_PROOF, "feedback": PROMPT_FEEDBACK}
    (d / "inputs.json").write_text(json.dumps(inputs, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    for name, text in [("informal.txt", INFORMAL_GOLDEN), ("informal_empty_context.txt", INFORMAL_EMPTY_GOLDEN),
                       ("formalize.txt", FORMAL_GOLDEN), ("formalize_feedback.txt", FORMAL_FEEDBACK_GOLDEN),
                       ("judge.txt", JUDGE_GOLDEN)]:
        (d / name).write_bytes(text.encode("utf-8"))


# ---------------------------------------------------------------------------

def run(cmd):
    res = subprocess.run(cmd, capture_output=True, text=True)
    if res.returncode != 0:
        sys.exit(f"command failed ({res.returncode}): {' '.join(map(str, cmd))}\n{res.stderr}")
    return res


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--kgprove", required=True)
    ap.add_argument("--freeze-bench", action="store_true", help="also rewrite golden bench reports")
    args = ap.parse_args()

    dump = HERE / "dump" / "sample.xml"
    dump.parent.mkdir(parents=True, exist_ok=True)
    write_dump(dump)

    graph = HERE / "graph"
    run([args.kgprove, "ingest", "--xml", str(dump), "--out", str(graph)])
    edges = (graph / "edges.csv").read_text(encoding="utf-8")
    if edges != expected_edges_csv():
        sys.exit("ingest edges differ from the hand-traced list:\n" + edges)
    stats = json.loads((graph / "stats.json").read_text(encoding="utf-8"))
    if stats != EXPECTED_STATS:
        sys.exit(f"ingest stats differ: {stats}")
    golden = HERE / "golden"
    golden.mkdir(exist_ok=True)
    (golden / "edges.csv").write_text(expected_edges_csv(), encoding="utf-8")
    (golden / "stats.json").write_text(json.dumps(EXPECTED_STATS, indent=2) + "\n", encoding="utf-8")
    (golden / "nodes.jsonl").write_bytes((graph / "nodes.jsonl").read_bytes())

    rng = random.Random(20240607)
    table = []
    nodes = [json.loads(l) for l in (graph / "nodes.jsonl").read_text(encoding="utf-8").splitlines() if l]
    for n in nodes:
        table.append({"text_hash": sha(n["title"] + "\n\n" + n["content"]),
                      "vector": vector_from_axes(NODE_AXES[n["title"]], rng)})
    rows = dataset_rows()
    seen = set()
    for _, informal, _ in rows + [(None, PROMPT_PROBLEM["informal_statement"], None)]:
        h = sha(informal)
        if h not in seen:
            seen.add(h)
            table.append({"text_hash": h, "vector": statement_vector(informal, rng)})

    (HERE / "dataset").mkdir(exist_ok=True)
    write_jsonl(HERE / "dataset" / "problems.jsonl", [r for _, _, r in rows])
    expected = {}
    for method in ("base", "rag", "graph"):
        d = HERE / "mock" / method
        d.mkdir(parents=True, exist_ok=True)
        chat, verifier = mock_scripts(method, rows)
        write_jsonl(d / "chat.jsonl", chat)
        write_jsonl(d / "verifier.jsonl", verifier)
        write_jsonl(d / "embeddings.jsonl", table)
        expected[method] = expected_summary_numbers(method)
    (golden / "bench_expected.json").write_text(json.dumps(expected, indent=2) + "\n", encoding="utf-8")
    (HERE / "responses").mkdir(exist_ok=True)
    write_jsonl(HERE / "responses" / "cases.jsonl", response_corpus())
    write_prompts(HERE / "prompts")

    if args.freeze_bench:
        for method in ("base", "rag", "graph"):
            with tempfile.TemporaryDirectory() as tmp:
                run([args.kgprove, "bench", "--graph", str(graph), "--dataset", str(HERE / "dataset" / "problems.jsonl"),
                     "--method", method, "--mock-dir", str(HERE / "mock" / method), "--out", tmp])
                out = golden / "bench" / method
                out.mkdir(parents=True, exist_ok=True)
                for f in ("report.json", "summary.md"):
                    (out / f).write_bytes((pathlib.Path(tmp) / f).read_bytes())
    print("fixtures written")


if __name__ == "__main__":
    main()
