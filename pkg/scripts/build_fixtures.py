#!/usr/bin/env python3
"""Regenerate the bundled fixture corpus and mock backend tables.

The corpus lives in this file as plain tables: 20 three-way examples and
20 defeasible examples (5 premise/hypothesis groups x 4 updates), each
with handcrafted atoms, gold effects, annotation records, and scripted
model responses. Everything downstream (mock tables, annotation files) is
derived deterministically, so committing the outputs freezes the whole
mock pipeline.

Run from the repository root:  python3 scripts/build_fixtures.py
"""
from __future__ import annotations

import json
from pathlib import Path

from atomnli.backends.mock import prompt_fingerprint
from atomnli.core import atom_id_for
from atomnli.decompose import PURPOSE_DECOMPOSITION, build_decomposition_prompt, default_exemplars
from atomnli.defeasible import build_defeasible_prompt, load_defeasible_context
from atomnli.nli_eval import build_nli_prompt, load_nli_context

OUT = Path(__file__).resolve().parent.parent / "src" / "atomnli" / "data" / "fixtures"

ANNOTATED_AT = "2025-06-02T09:00:00Z"
SECOND_PASS_AT = "2025-06-03T14:30:00Z"

# ---------------------------------------------------------------------------
# Three-way corpus. Per atom: text, the scripted admit response (model's
# hypothesis-vs-atom label), and the scripted premise-vs-atom label. An
# atom with stage1="n" is cut by classifier pruning and never evaluated.
# ---------------------------------------------------------------------------

SNLI = [
    {
        "id": "snli-001", "gold": "e",
        "premise": "A woman in a red jacket jogs along a beach at sunrise.",
        "hypothesis": "A woman is exercising outdoors.",
        "full": "e",
        "atoms": [
            {"text": "There is a person.", "admit": "e", "label": "e"},
            {"text": "The person is a woman.", "admit": "e", "label": "e"},
            {"text": "The person is exercising.", "admit": "e", "label": "e"},
            {"text": "The exercising happens outdoors.", "admit": "e", "label": "e"},
        ],
    },
    {
        "id": "snli-002", "gold": "e",
        "premise": "Two children slide down a snowy hill on a blue sled.",
        "hypothesis": "Children play in the snow.",
        "full": "e",
        "atoms": [
            {"text": "There are children.", "admit": "e", "label": "e"},
            {"text": "The children are playing.", "admit": "e", "label": "e"},
            {"text": "There is snow.", "admit": "e", "label": "e"},
            {"text": "The playing happens in the snow.", "admit": "e", "label": "e"},
        ],
    },
    {
        "id": "snli-003", "gold": "n",
        "premise": "A man with a backpack waits at a crowded bus stop.",
        "hypothesis": "A man is late for work.",
        "full": "n",
        "atoms": [
            {"text": "There is a person.", "admit": "e", "label": "e"},
            {"text": "The person is a man.", "admit": "e", "label": "e"},
            {"text": "The person is late.", "admit": "e", "label": "n"},
            {"text": "The person has a job.", "stage1": "n"},
        ],
    },
    {
        "id": "snli-004", "gold": "n",
        "premise": "A girl holds a balloon outside a shop.",
        "hypothesis": "The girl just bought the balloon.",
        "full": "e",
        "atoms": [
            {"text": "There is a girl.", "admit": "e", "label": "e"},
            {"text": "The girl has a balloon.", "admit": "e", "label": "e"},
            {"text": "The balloon was bought.", "admit": "e", "label": "n"},
            {"text": "The buying happened recently.", "admit": "e", "label": "n"},
        ],
    },
    {
        "id": "snli-005", "gold": "c",
        "premise": "A cyclist pedals up a mountain road in the rain.",
        "hypothesis": "A cyclist rests inside a cafe.",
        "full": "c",
        "atoms": [
            {"text": "There is a cyclist.", "admit": "e", "label": "e"},
            {"text": "The cyclist is resting.", "admit": "e", "label": "c"},
            {"text": "The cyclist is inside a cafe.", "admit": "e", "label": "c"},
        ],
    },
    {
        "id": "snli-006", "gold": "e",
        "premise": "Three musicians play violins on a concert stage.",
        "hypothesis": "People are playing instruments.",
        "full": "e",
        "atoms": [
            {"text": "There are people.", "admit": "e", "label": "e"},
            {"text": "The people are playing instruments.", "admit": "e", "label": "e"},
        ],
    },
    {
        "id": "snli-007", "gold": "n",
        "premise": "A man in overalls paints a wooden fence white.",
        "hypothesis": "The man is painting his own fence.",
        "full": "n",
        "atoms": [
            {"text": "There is a man.", "admit": "e", "label": "e"},
            {"text": "The man is painting a fence.", "admit": "n"},
            {"text": "The fence belongs to the man.", "admit": "e", "label": "n"},
        ],
    },
    {
        "id": "snli-008", "gold": "c",
        "premise": "A group of hikers climbs a steep trail at noon.",
        "hypothesis": "The hikers are swimming in a lake.",
        "full": "c",
        "atoms": [
            {"text": "There are hikers.", "admit": "e", "label": "e"},
            {"text": "The hikers are swimming.", "admit": "e", "label": "c"},
            {"text": "There is a lake.", "admit": "e", "label": "n"},
        ],
    },
    {
        "id": "snli-009", "gold": "e",
        "premise": "An elderly man feeds pigeons from a park bench.",
        "hypothesis": "A man is sitting in a park.",
        "full": "e",
        "atoms": [
            {"text": "There is a man.", "admit": "e", "label": "e"},
            {"text": "The man is sitting.", "admit": "e", "label": "n"},
            {"text": "The man is in a park.", "admit": "e", "label": "e"},
        ],
    },
    {
        "id": "snli-010", "gold": "n",
        "premise": "A waiter carries plates through a busy restaurant.",
        "hypothesis": "The waiter is about to take a break.",
        "full": "n",
        "atoms": [
            {"text": "There is a waiter.", "admit": "e", "label": "e"},
            {"text": "The waiter will take a break.", "admit": "e", "label": "n"},
            {"text": "The break is imminent.", "admit": "e", "label": "n"},
        ],
    },
    {
        "id": "snli-011", "gold": "c",
        "premise": "A barista pours coffee for a line of customers.",
        "hypothesis": "The barista is asleep at home.",
        "full": "n",
        "atoms": [
            {"text": "There is a barista.", "admit": "e", "label": "e"},
            {"text": "The barista is asleep.", "admit": "e", "label": "c"},
            {"text": "The barista is at home.", "admit": "e", "label": "c"},
        ],
    },
    {
        "id": "snli-012", "gold": "e",
        "premise": "A young boy kicks a soccer ball toward a goal.",
        "hypothesis": "A boy plays with a ball.",
        "full": "e",
        "atoms": [
            {"text": "There is a boy.", "admit": "e", "label": "e"},
            {"text": "The boy is playing.", "admit": "e", "label": "e"},
            {"text": "The playing involves a ball.", "admit": "e", "label": "e"},
        ],
    },
    {
        "id": "snli-013", "gold": "n",
        "premise": "A woman studies a painting in a quiet gallery.",
        "hypothesis": "The woman is an art critic writing a review.",
        "full": "n",
        "atoms": [
            {"text": "There is a woman.", "admit": "e", "label": "e"},
            {"text": "The woman is an art critic.", "admit": "e", "label": "n"},
            {"text": "The woman is writing a review.", "admit": "c"},
        ],
    },
    {
        "id": "snli-014", "gold": "c",
        "premise": "A farmer drives a tractor across a sunlit wheat field.",
        "hypothesis": "The farmer harvests by hand at night.",
        "full": "c",
        "atoms": [
            {"text": "There is a farmer.", "admit": "e", "label": "e"},
            {"text": "The farmer is harvesting.", "admit": "e", "label": "n"},
            {"text": "The harvesting is done by hand.", "admit": "e", "label": "c"},
            {"text": "It is night.", "admit": "e", "label": "c"},
        ],
    },
    {
        "id": "snli-015", "gold": "e",
        "premise": "Four dancers in costumes rehearse on an outdoor stage.",
        "hypothesis": "People are dancing outside.",
        "full": "e",
        "atoms": [
            {"text": "There are people.", "admit": "e", "label": "e"},
            {"text": "The people are dancing.", "admit": "e", "label": "e"},
            {"text": "The dancing happens outside.", "admit": "e", "label": "n"},
        ],
    },
    {
        "id": "snli-016", "gold": "n",
        "premise": "A shopkeeper arranges oranges in a wooden crate.",
        "hypothesis": "The shopkeeper is preparing for the morning rush.",
        "full": "n",
        "atoms": [
            {"text": "There is a shopkeeper.", "admit": "n"},
            {"text": "The shopkeeper is preparing for something.", "admit": "n"},
            {"text": "The preparation is for the morning rush.", "admit": "n"},
        ],
    },
    {
        "id": "snli-017", "gold": "n",
        "premise": "A dog trots beside a jogger on a gravel path.",
        "hypothesis": "The dog belongs to the jogger.",
        "full": "c",
        "atoms": [
            {"text": "There is a dog.", "admit": "e", "label": "e"},
            {"text": "There is a jogger.", "admit": "e", "label": "e"},
            {"text": "The jogger owns the dog.", "admit": "e", "label": "n"},
        ],
    },
    {
        "id": "snli-018", "gold": "c",
        "premise": "A chef flips pancakes at a diner griddle.",
        "hypothesis": "The chef is repairing a car engine.",
        "full": "c",
        "atoms": [
            {"text": "There is a chef.", "admit": "e", "label": "e"},
            {"text": "The chef is repairing something.", "admit": "e", "label": "n"},
            {"text": "The thing being repaired is a car engine.", "admit": "e", "label": "c"},
        ],
    },
    {
        "id": "snli-019", "gold": "e",
        "premise": "Two rowers pull their boat across a calm lake at dawn.",
        "hypothesis": "People are rowing a boat.",
        "full": "e",
        "atoms": [
            {"text": "There are people.", "admit": "e", "label": "e"},
            {"text": "The people are rowing.", "admit": "e", "label": "e"},
            {"text": "There is a boat.", "admit": "e", "label": "e"},
        ],
    },
    {
        "id": "snli-020", "gold": "c",
        "premise": "A librarian shelves books in the history aisle.",
        "hypothesis": "The librarian is burning the books.",
        "full": "c",
        "atoms": [
            {"text": "There is a librarian.", "admit": "e", "label": "e"},
            {"text": "The librarian is burning something.", "admit": "e", "label": "n"},
            {"text": "The things being burned are books.", "admit": "e", "label": "n"},
        ],
    },
]

# ---------------------------------------------------------------------------
# Defeasible corpus: 5 premise/hypothesis groups x 4 updates. Atom flags:
# stage1="n" fails hypothesis pruning, stage2=True is premise-entailed,
# invalid=True survives pruning but is humanly invalid (no effect, no
# sub-problem). Effects and model responses are keyed by atom text.
# ---------------------------------------------------------------------------

DNLI_GROUPS = [
    {
        "premise": "A man stands at a folding table covered with small electronics.",
        "hypothesis": "The man is selling refurbished phones at a flea market.",
        "atoms": [
            {"text": "There is a man.", "stage2": True},
            {"text": "The man is selling things."},
            {"text": "The things being sold are phones."},
            {"text": "The phones are refurbished."},
            {"text": "The selling happens at a flea market."},
            {"text": "The market is crowded.", "stage1": "n"},
        ],
        "examples": [
            {
                "id": "dsnli-001", "gold": "strengthener",
                "update": "Shoppers hand the man cash as he wraps phones in bubble wrap.",
                "effects": {"The man is selling things.": 2,
                            "The things being sold are phones.": 2,
                            "The phones are refurbished.": 0,
                            "The selling happens at a flea market.": 1},
                "full": "more",
                "responses": {"The man is selling things.": "more",
                              "The things being sold are phones.": "more",
                              "The phones are refurbished.": "none",
                              "The selling happens at a flea market.": "none"},
            },
            {
                "id": "dsnli-002", "gold": "strengthener",
                "update": "A handwritten sign lists prices for different phone models.",
                "effects": {"The man is selling things.": 2,
                            "The things being sold are phones.": 2,
                            "The phones are refurbished.": 0,
                            "The selling happens at a flea market.": 0},
                "full": "more",
                "responses": {"The man is selling things.": "more",
                              "The things being sold are phones.": "more",
                              "The phones are refurbished.": "none",
                              "The selling happens at a flea market.": "none"},
            },
            {
                "id": "dsnli-003", "gold": "weakener",
                "update": "The man is packing the electronics into donation boxes.",
                "effects": {"The man is selling things.": -2,
                            "The things being sold are phones.": 0,
                            "The phones are refurbished.": 0,
                            "The selling happens at a flea market.": -1},
                "full": "less",
                "responses": {"The man is selling things.": "less",
                              "The things being sold are phones.": "none",
                              "The phones are refurbished.": "none",
                              "The selling happens at a flea market.": "less"},
            },
            {
                "id": "dsnli-004", "gold": "weakener",
                "update": "A banner above the table reads free recycling drop-off.",
                "effects": {"The man is selling things.": -2,
                            "The things being sold are phones.": -1,
                            "The phones are refurbished.": 0,
                            "The selling happens at a flea market.": -1},
                "full": "more",
                "responses": {"The man is selling things.": "more",
                              "The things being sold are phones.": "less",
                              "The phones are refurbished.": "none",
                              "The selling happens at a flea market.": "less"},
            },
        ],
    },
    {
        "premise": "A woman kneels in a garden bed holding a small trowel.",
        "hypothesis": "The woman is planting tomato seedlings she grew from seed.",
        "atoms": [
            {"text": "There is a woman.", "stage2": True},
            {"text": "The woman is planting things."},
            {"text": "The things being planted are seedlings."},
            {"text": "The seedlings are tomato seedlings."},
            {"text": "The woman grew the seedlings from seed."},
            {"text": "The woman is wearing gloves.", "stage1": "n"},
            {"text": "The thing the woman is holding is up.", "invalid": True},
        ],
        "examples": [
            {
                "id": "dsnli-005", "gold": "strengthener",
                "update": "Seed trays with tiny labeled tomato sprouts sit beside her.",
                "effects": {"The woman is planting things.": 1,
                            "The things being planted are seedlings.": 2,
                            "The seedlings are tomato seedlings.": 2,
                            "The woman grew the seedlings from seed.": 2},
                "full": "more",
                "responses": {"The woman is planting things.": "more",
                              "The things being planted are seedlings.": "more",
                              "The seedlings are tomato seedlings.": "more",
                              "The woman grew the seedlings from seed.": "more"},
            },
            {
                "id": "dsnli-006", "gold": "strengthener",
                "update": "An empty seed packet labeled heirloom tomatoes lies next to her knee.",
                "effects": {"The woman is planting things.": 1,
                            "The things being planted are seedlings.": 1,
                            "The seedlings are tomato seedlings.": 2,
                            "The woman grew the seedlings from seed.": 2},
                "full": "more",
                "responses": {"The woman is planting things.": "more",
                              "The things being planted are seedlings.": "more",
                              "The seedlings are tomato seedlings.": "more",
                              "The woman grew the seedlings from seed.": "none"},
            },
            {
                "id": "dsnli-007", "gold": "weakener",
                "update": "She is pulling the plants out and tossing them into a weed bucket.",
                "effects": {"The woman is planting things.": -2,
                            "The things being planted are seedlings.": -2,
                            "The seedlings are tomato seedlings.": -1,
                            "The woman grew the seedlings from seed.": 0},
                "full": "less",
                "responses": {"The woman is planting things.": "less",
                              "The things being planted are seedlings.": "less",
                              "The seedlings are tomato seedlings.": "none",
                              "The woman grew the seedlings from seed.": "none"},
            },
            {
                "id": "dsnli-008", "gold": "weakener",
                "update": "The woman is smoothing fresh concrete for a path next to the bed.",
                "effects": {"The woman is planting things.": -2,
                            "The things being planted are seedlings.": -1,
                            "The seedlings are tomato seedlings.": -1,
                            "The woman grew the seedlings from seed.": 0},
                "full": "less",
                "responses": {"The woman is planting things.": "less",
                              "The things being planted are seedlings.": "less",
                              "The seedlings are tomato seedlings.": "none",
                              "The woman grew the seedlings from seed.": "none"},
            },
        ],
    },
    {
        "premise": "Two men carry a long wooden ladder toward a brick house.",
        "hypothesis": "The men are going to clean the gutters of the house.",
        "atoms": [
            {"text": "There are two men.", "stage2": True},
            {"text": "The men are going to clean something."},
            {"text": "The things to be cleaned are gutters."},
            {"text": "The gutters belong to the house."},
        ],
        "examples": [
            {
                "id": "dsnli-009", "gold": "strengthener",
                "update": "Wet leaves spill over the edges of the roofline.",
                "effects": {"The men are going to clean something.": 1,
                            "The things to be cleaned are gutters.": 2,
                            "The gutters belong to the house.": 1},
                "full": "more",
                "responses": {"The men are going to clean something.": "more",
                              "The things to be cleaned are gutters.": "more",
                              "The gutters belong to the house.": "more"},
            },
            {
                "id": "dsnli-010", "gold": "strengthener",
                "update": "One man holds a bucket of gutter scoops and work gloves.",
                "effects": {"The men are going to clean something.": 2,
                            "The things to be cleaned are gutters.": 2,
                            "The gutters belong to the house.": 0},
                "full": "more",
                "responses": {"The men are going to clean something.": "more",
                              "The things to be cleaned are gutters.": "more",
                              "The gutters belong to the house.": "none"},
            },
            {
                "id": "dsnli-011", "gold": "weakener",
                "update": "The men begin painting the window shutters.",
                "effects": {"The men are going to clean something.": -1,
                            "The things to be cleaned are gutters.": -2,
                            "The gutters belong to the house.": 0},
                "full": "less",
                "responses": {"The men are going to clean something.": "none",
                              "The things to be cleaned are gutters.": "less",
                              "The gutters belong to the house.": "none"},
            },
            {
                "id": "dsnli-012", "gold": "weakener",
                "update": "A moving van in the driveway is being loaded with furniture.",
                "effects": {"The men are going to clean something.": -1,
                            "The things to be cleaned are gutters.": -1,
                            "The gutters belong to the house.": 0},
                "full": "more",
                "responses": {"The men are going to clean something.": "less",
                              "The things to be cleaned are gutters.": "none",
                              "The gutters belong to the house.": "none"},
            },
        ],
    },
    {
        "premise": "A teenager sits on a bench with a guitar case open at his feet.",
        "hypothesis": "The teenager is performing songs for money downtown.",
        "atoms": [
            {"text": "There is a teenager.", "stage2": True},
            {"text": "The teenager is performing."},
            {"text": "The things performed are songs."},
            {"text": "The purpose of performing is to earn money."},
            {"text": "The performing happens downtown."},
        ],
        "examples": [
            {
                "id": "dsnli-013", "gold": "strengthener",
                "update": "Passersby drop coins into the open case as he strums.",
                "effects": {"The teenager is performing.": 2,
                            "The things performed are songs.": 1,
                            "The purpose of performing is to earn money.": 2,
                            "The performing happens downtown.": 0},
                "full": "more",
                "responses": {"The teenager is performing.": "more",
                              "The things performed are songs.": "more",
                              "The purpose of performing is to earn money.": "more",
                              "The performing happens downtown.": "none"},
            },
            {
                "id": "dsnli-014", "gold": "strengthener",
                "update": "Tall office buildings and a city square surround the bench.",
                "effects": {"The teenager is performing.": 0,
                            "The things performed are songs.": 0,
                            "The purpose of performing is to earn money.": 0,
                            "The performing happens downtown.": 2},
                "full": "more",
                "responses": {"The teenager is performing.": "none",
                              "The things performed are songs.": "none",
                              "The purpose of performing is to earn money.": "none",
                              "The performing happens downtown.": "more"},
            },
            {
                "id": "dsnli-015", "gold": "weakener",
                "update": "The case is empty and the guitar is still zipped inside.",
                "effects": {"The teenager is performing.": -2,
                            "The things performed are songs.": -1,
                            "The purpose of performing is to earn money.": -1,
                            "The performing happens downtown.": 0},
                "full": "less",
                "responses": {"The teenager is performing.": "less",
                              "The things performed are songs.": "less",
                              "The purpose of performing is to earn money.": "none",
                              "The performing happens downtown.": "none"},
            },
            {
                "id": "dsnli-016", "gold": "weakener",
                "update": "A music school schedule pokes out of his backpack.",
                "effects": {"The teenager is performing.": 0,
                            "The things performed are songs.": 0,
                            "The purpose of performing is to earn money.": -1,
                            "The performing happens downtown.": 0},
                "full": "less",
                "responses": {"The teenager is performing.": "none",
                              "The things performed are songs.": "none",
                              "The purpose of performing is to earn money.": "less",
                              "The performing happens downtown.": "none"},
            },
        ],
    },
    {
        "premise": "A crowd gathers around a food cart under string lights.",
        "hypothesis": "The vendor is selling hot tacos at a night market.",
        "atoms": [
            {"text": "There is a vendor."},
            {"text": "The vendor is selling food."},
            {"text": "The food being sold is tacos."},
            {"text": "The tacos are hot."},
            {"text": "The selling happens at a night market."},
            {"text": "There is food.", "stage2": True},
        ],
        "examples": [
            {
                "id": "dsnli-017", "gold": "strengthener",
                "update": "Steam rises from a griddle stacked with tortillas and seasoned meat.",
                "effects": {"There is a vendor.": 1,
                            "The vendor is selling food.": 2,
                            "The food being sold is tacos.": 2,
                            "The tacos are hot.": 2,
                            "The selling happens at a night market.": 0},
                "full": "more",
                "responses": {"There is a vendor.": "more",
                              "The vendor is selling food.": "more",
                              "The food being sold is tacos.": "more",
                              "The tacos are hot.": "more",
                              "The selling happens at a night market.": "none"},
            },
            {
                "id": "dsnli-018", "gold": "weakener",
                "update": "The cart's shutters are closed and a sold-out sign hangs on the side.",
                "effects": {"There is a vendor.": 0,
                            "The vendor is selling food.": -2,
                            "The food being sold is tacos.": 0,
                            "The tacos are hot.": -1,
                            "The selling happens at a night market.": 0},
                "full": "less",
                "responses": {"There is a vendor.": "none",
                              "The vendor is selling food.": "less",
                              "The food being sold is tacos.": "none",
                              "The tacos are hot.": "none",
                              "The selling happens at a night market.": "none"},
            },
            {
                "id": "dsnli-019", "gold": "strengthener",
                "update": "Paper lanterns glow above the nearby stalls.",
                "effects": {"There is a vendor.": 0,
                            "The vendor is selling food.": 0,
                            "The food being sold is tacos.": 0,
                            "The tacos are hot.": 0,
                            "The selling happens at a night market.": 0},
                "full": "more",
                "responses": {"There is a vendor.": "none",
                              "The vendor is selling food.": "none",
                              "The food being sold is tacos.": "none",
                              "The tacos are hot.": "none",
                              "The selling happens at a night market.": "none"},
            },
            {
                "id": "dsnli-020", "gold": "weakener",
                "update": "A city inspector tapes a closure notice to the cart.",
                "effects": {"There is a vendor.": 0,
                            "The vendor is selling food.": -2,
                            "The food being sold is tacos.": -1,
                            "The tacos are hot.": 0,
                            "The selling happens at a night market.": -1},
                "full": "less",
                "responses": {"There is a vendor.": "none",
                              "The vendor is selling food.": "less",
                              "The food being sold is tacos.": "less",
                              "The tacos are hot.": "none",
                              "The selling happens at a night market.": "less"},
            },
        ],
    },
]

# Second annotator: relabels every surviving atom of the first two groups,
# with a few deliberate disagreements for the agreement statistics.
SECOND_ANNOTATOR_GROUPS = (0, 1)
SECOND_ANNOTATOR_OVERRIDES = {
    ("dsnli-001", "The selling happens at a flea market."): {"effect": 0},
    ("dsnli-004", "The phones are refurbished."): {"valid": False},
    ("dsnli-006", "The woman grew the seedlings from seed."): {"effect": 1},
    ("dsnli-007", "The seedlings are tomato seedlings."): {"effect": -2},
}


def _explained(answer: str, explanation: str) -> str:
    return f"{answer}\n{explanation}\n[END]"


def build():
    OUT.mkdir(parents=True, exist_ok=True)
    decomposition_exemplars = default_exemplars(PURPOSE_DECOMPOSITION)
    nli_context = load_nli_context()
    binary_context = load_defeasible_context()
    ternary_context = load_defeasible_context(atoms=True)

    generation = {}
    nli_pairs = []
    snli_rows = []
    dnli_rows = []
    annotations = []

    def add_generation(prompt: str, response: str, hint: str) -> None:
        generation[prompt_fingerprint(prompt)] = {"response": response, "hint": hint}

    # ---- three-way corpus -------------------------------------------------
    for row in SNLI:
        snli_rows.append({
            "id": row["id"], "premise": row["premise"],
            "hypothesis": row["hypothesis"], "gold": row["gold"],
        })
        facts = "\n".join(
            f"{i}. {atom['text']}" for i, atom in enumerate(row["atoms"], start=1)
        )
        add_generation(
            build_decomposition_prompt(row["hypothesis"], decomposition_exemplars),
            f"{facts}\n[END]",
            f"decompose:{row['id']}",
        )
        add_generation(
            build_nli_prompt(row["premise"], row["hypothesis"], nli_context),
            _explained(row["full"], "Judged from the full pair."),
            f"nli-full:{row['id']}",
        )
        for index, atom in enumerate(row["atoms"]):
            stage1 = atom.get("stage1", "e")
            nli_pairs.append({"premise": row["hypothesis"], "hypothesis": atom["text"],
                              "label": stage1})
            if stage1 != "e":
                continue
            add_generation(
                build_nli_prompt(row["hypothesis"], atom["text"], nli_context),
                _explained(atom["admit"], "Atom judged against the hypothesis."),
                f"admit:{row['id']}:{index}",
            )
            if atom["admit"] == "e":
                add_generation(
                    build_nli_prompt(row["premise"], atom["text"], nli_context),
                    _explained(atom["label"], "Atom judged against the premise."),
                    f"nli-atom:{row['id']}:{index}",
                )

    # ---- defeasible corpus ------------------------------------------------
    for group_index, group in enumerate(DNLI_GROUPS):
        facts = "\n".join(
            f"{i}. {atom['text']}" for i, atom in enumerate(group["atoms"], start=1)
        )
        add_generation(
            build_decomposition_prompt(group["hypothesis"], decomposition_exemplars),
            f"{facts}\n[END]",
            f"decompose:group{group_index}",
        )
        for atom in group["atoms"]:
            stage1 = atom.get("stage1", "e")
            nli_pairs.append({"premise": group["hypothesis"], "hypothesis": atom["text"],
                              "label": stage1})
            if stage1 == "e" and atom.get("stage2"):
                nli_pairs.append({"premise": group["premise"],
                                  "hypothesis": atom["text"], "label": "e"})

        surviving = [
            atom for atom in group["atoms"]
            if atom.get("stage1", "e") == "e" and not atom.get("stage2")
        ]
        for example in group["examples"]:
            dnli_rows.append({
                "id": example["id"], "premise": group["premise"],
                "hypothesis": group["hypothesis"], "update": example["update"],
                "gold": example["gold"],
            })
            add_generation(
                build_defeasible_prompt(group["premise"], group["hypothesis"],
                                        example["update"], binary_context, ternary=False),
                _explained(example["full"], "Weighed the evidence against the hypothesis."),
                f"defeasible-full:{example['id']}",
            )
            for atom in surviving:
                atom_id = atom_id_for(example["id"], atom["text"])
                if atom.get("invalid"):
                    annotations.append({
                        "atom_id": atom_id, "annotator_id": "a1", "valid": False,
                        "effect": None, "timestamp": ANNOTATED_AT,
                    })
                    continue
                effect = example["effects"][atom["text"]]
                annotations.append({
                    "atom_id": atom_id, "annotator_id": "a1", "valid": True,
                    "effect": effect, "timestamp": ANNOTATED_AT,
                })
                add_generation(
                    build_defeasible_prompt(group["premise"], atom["text"],
                                            example["update"], ternary_context, ternary=True),
                    _explained(example["responses"][atom["text"]],
                               "Weighed the evidence against the atom."),
                    f"defeasible-atom:{example['id']}:{atom['text'][:24]}",
                )
            if group_index in SECOND_ANNOTATOR_GROUPS:
                for atom in surviving:
                    atom_id = atom_id_for(example["id"], atom["text"])
                    override = SECOND_ANNOTATOR_OVERRIDES.get(
                        (example["id"], atom["text"]), {})
                    if atom.get("invalid") or override.get("valid") is False:
                        annotations.append({
                            "atom_id": atom_id, "annotator_id": "a2", "valid": False,
                            "effect": None, "timestamp": SECOND_PASS_AT,
                        })
                        continue
                    effect = override.get("effect", example["effects"][atom["text"]])
                    annotations.append({
                        "atom_id": atom_id, "annotator_id": "a2", "valid": True,
                        "effect": effect, "timestamp": SECOND_PASS_AT,
                    })

    # ---- write everything -------------------------------------------------
    def write_jsonl(name: str, rows) -> None:
        with (OUT / name).open("w", encoding="utf-8") as handle:
            for row in rows:
                handle.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    unique_pairs = {}
    for pair in nli_pairs:
        unique_pairs[(pair["premise"], pair["hypothesis"])] = pair
    nli_pairs = [unique_pairs[key] for key in sorted(unique_pairs)]

    write_jsonl("snli20.jsonl", snli_rows)
    write_jsonl("dnli20.jsonl", dnli_rows)
    write_jsonl("annotations_dnli20.jsonl", annotations)
    (OUT / "mock_generation.json").write_text(
        json.dumps(generation, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )
    (OUT / "mock_nli.json").write_text(
        json.dumps(nli_pairs, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )
    print(f"wrote {len(snli_rows)} + {len(dnli_rows)} examples, "
          f"{len(annotations)} annotation records, "
          f"{len(generation)} generation fixtures, {len(nli_pairs)} NLI pairs")


if __name__ == "__main__":
    build()
