#!/usr/bin/env python3
"""Regenerates the bundled demo data: fixtures/mini, fixtures/corpus and mocks/demo.mock."""

import json
import pathlib

from PIL import Image, ImageDraw

ROOT = pathlib.Path(__file__).resolve().parent.parent
MINI = ROOT / "fixtures" / "mini"
CORPUS = ROOT / "fixtures" / "corpus"
MOCKS = ROOT / "mocks"

# Distinctive substrings of the published prompts, used as mock match keys.
SINGLE = "Think step by step before answering."
COLLAB_PERCEIVER = "so you should state the exact question"
TURN1_PERCEIVER = "You can send the expert only one message"
COLLAB_REASONER = "so you should try to gather from the client"
TURN1_REASONER = "you cannot ask follow-up questions"
EXTRACT = "Now it's time to write the final answer."
OPENER = ("Hi, I'm the expert here. I heard you have a multiple choice question about an image and I can "
          "help you with that. Could you state the exact question, the options, and provide a detailed "
          "description of the image?")

# p: perceiver alone, rt: reasoner text only, rv: reasoner with vision,
# c: collaborative extraction reply, st: single-turn extraction reply.
TASKS = [
    dict(id="mini-01", subject="biology", color=(40, 140, 60), shape="lines",
         question="Which plant family does the specimen in the photograph belong to?",
         options=["Poaceae", "Rosaceae", "Fabaceae", "Asteraceae", "Juncaceae", "Orchidaceae", "Cyperaceae"],
         gold="G", p="Answer: C", rt="Answer: A", rv="Answer: G", c="Answer: G", st="**G. Cyperaceae**",
         desc="a grass-like plant with a solid stem that is clearly triangular in cross-section and leaves in three ranks",
         follow=["The stem is solid, not hollow.", "Yes, the cross-section has three sharp edges.",
                 "The flowers sit in small brown spikelets.", "There are no visible nodes on the stem."]),
    dict(id="mini-02", subject="charts", color=(30, 90, 200), shape="bars",
         question="In the bar chart, which category has the tallest bar?",
         options=["North", "East", "South", "West"],
         gold="B", p="Answer: B", rt="Answer: D", rv="Answer: B", c="Answer: B", st="Answer: B",
         desc="a bar chart with four bars labelled North, East, South and West; the East bar reaches about 80",
         follow=["North is about 40.", "South is about 55.", "West is about 30.", "The axis runs from 0 to 100."]),
    dict(id="mini-03", subject="everyday", color=(200, 200, 200), shape="clock",
         question="What time does the analog clock show?",
         options=["2:15", "4:10", "3:40", "8:20"],
         gold="C", p="Looking at the hands carefully.\n**C. 3:40**", rt="Answer: B", rv="Answer: A",
         c="Answer: C", st="Answer: C",
         desc="an analog clock whose short hand sits between 3 and 4 and whose long hand points at 8",
         follow=["The short hand is closer to 4 than to 3.", "The long hand points exactly at the 8.",
                 "There is no second hand.", "The numerals are Arabic."]),
    dict(id="mini-04", subject="counting", color=(220, 120, 30), shape="dots",
         question="How many filled circles are in the picture?",
         options=["4", "5", "6", "7"],
         gold="D", p="Answer: A", rt="Answer: C", rv="Answer: B", c="Answer: D", st="Answer: A",
         desc="several filled orange circles scattered on a white background, some touching each other",
         follow=["Top row has three circles.", "Bottom row has four circles, two of them touching.",
                 "None of them overlap fully.", "All circles are the same size."]),
    dict(id="mini-05", subject="geometry", color=(120, 40, 160), shape="triangle",
         question="What is the measure of the marked angle in the triangle?",
         options=["30 degrees", "45 degrees", "60 degrees", "90 degrees"],
         gold="A", p="Answer: A", rt="Answer: A", rv="Answer: A", c="Answer: B", st="Answer: A",
         desc="a right triangle with the right angle at the bottom left and the marked angle at the top",
         follow=["The side opposite the marked angle is labelled 1.", "The hypotenuse is labelled 2.",
                 "The right angle is marked with a small square.", "No other angles are labelled."]),
    dict(id="mini-06", subject="maps", color=(60, 160, 160), shape="arrow",
         question="In which direction does the arrow on the map point?",
         options=["North", "East", "South", "West"],
         gold="C", p="Answer: B", rt="Answer: B", rv="Answer: D", c="I am not able to decide from the discussion.",
         st="Answer: B",
         desc="a simple map with a compass rose in the corner and a thick arrow in the middle",
         follow=["The compass rose has N at the top.", "The arrow head is at the bottom of the map.",
                 "The arrow is vertical.", "There are no other arrows."]),
    dict(id="mini-07", subject="signs", color=(210, 30, 30), shape="octagon",
         question="What is the background color of the road sign?",
         options=["Red", "Blue", "Green", "Yellow"],
         gold="A", p="Answer: A", rt="Answer: B", rv="Answer: A", c="Answer: A", st="Answer: A",
         desc="an eight-sided road sign with white letters on a solid background",
         follow=["The background is a saturated red.", "The letters are white.", "The border is thin and white.",
                 "The sign is mounted on a grey pole."]),
    dict(id="mini-08", subject="chemistry", color=(90, 90, 90), shape="molecule",
         question="Which functional group is highlighted in the structural formula?",
         options=["Hydroxyl", "Carboxyl", "Amino", "Aldehyde"],
         gold="B", p="Answer: D", rt="Answer: B", rv="Answer: B", c="Answer: B", st="Answer: D",
         desc="a skeletal formula with a highlighted carbon double-bonded to one oxygen and single-bonded to an OH",
         follow=["The highlighted carbon has two oxygens attached.", "One oxygen carries a hydrogen.",
                 "There is no nitrogen anywhere.", "The group sits at the end of the chain."]),
    dict(id="mini-09", subject="charts", color=(250, 200, 40), shape="pie",
         question="What fraction of the pie chart is shaded?",
         options=["1/4", "1/3", "1/2", "3/4"],
         gold="D", p="Answer: D", rt="Answer: A", rv="Answer: C", c="Answer: D", st="Answer: D",
         desc="a pie chart where three of the four equal quarters are shaded yellow",
         follow=["The circle is divided into four equal parts.", "Only the top left quarter is white.",
                 "The shading is uniform.", "There is no legend."]),
    dict(id="mini-10", subject="physics", color=(180, 60, 100), shape="thermo",
         question="What temperature does the thermometer read?",
         options=["12 degrees", "18 degrees", "24 degrees", "30 degrees"],
         gold="C", p="Answer: C", rt="Answer: D", rv="Answer: C", c="Answer: C", st="Answer: C",
         desc="a vertical thermometer with marks every 6 degrees and the liquid column ending at the fourth mark",
         follow=["The lowest mark is 0.", "The column ends exactly on a mark.", "Marks are evenly spaced.",
                 "The scale is in Celsius."], long_think=True),
]

CORPUS_ITEMS = [
    dict(file="c1-kept.png", category="diagrams", color=(10, 120, 200),
         question="Which labelled part of the diagram stores water?",
         options=["Root", "Stem", "Leaf", "Vacuole"], text_only="Answer: B", multimodal="Answer: D",
         conversations=["Answer: C", "Answer: D"]),
    dict(file="c2-textual.png", category="charts", color=(200, 80, 10),
         question="Which of these colors appears in the national flag shown?",
         options=["Red", "Purple", "Brown", "Grey"], text_only="Answer: A", multimodal="Answer: A",
         conversations=["Answer: A"]),
    dict(file="c3-hard.png", category="photos", color=(80, 200, 80),
         question="How many windows are on the second floor of the building?",
         options=["2", "3", "4", "5"], text_only="Answer: C", multimodal="Answer: B",
         conversations=["Answer: D"]),
    dict(file="c4-unparseable.png", category="photos", color=(150, 150, 30), question=None),
]


def draw(path, color, shape):
    img = Image.new("RGB", (64, 64), (255, 255, 255))
    d = ImageDraw.Draw(img)
    if shape == "bars":
        for i, h in enumerate([26, 52, 36, 20]):
            d.rectangle([6 + i * 14, 60 - h, 16 + i * 14, 60], fill=color)
    elif shape == "dots":
        for x, y in [(12, 14), (32, 14), (52, 14), (10, 44), (24, 44), (38, 44), (52, 44)]:
            d.ellipse([x - 6, y - 6, x + 6, y + 6], fill=color)
    elif shape == "clock":
        d.ellipse([4, 4, 60, 60], outline=(0, 0, 0), width=2)
        d.line([32, 32, 42, 38], fill=(0, 0, 0), width=3)
        d.line([32, 32, 14, 42], fill=(0, 0, 0), width=2)
    elif shape == "triangle":
        d.polygon([(8, 56), (56, 56), (8, 8)], outline=color, width=3)
    elif shape == "pie":
        d.pieslice([4, 4, 60, 60], 180, 450, fill=color)
        d.ellipse([4, 4, 60, 60], outline=(0, 0, 0))
    elif shape == "octagon":
        d.regular_polygon((32, 32, 28), 8, fill=color)
    elif shape == "arrow":
        d.line([32, 8, 32, 50], fill=color, width=6)
        d.polygon([(22, 46), (42, 46), (32, 60)], fill=color)
    elif shape == "thermo":
        d.rectangle([28, 4, 36, 52], outline=(0, 0, 0))
        d.rectangle([29, 24, 35, 52], fill=color)
        d.ellipse([24, 48, 40, 62], fill=color)
    elif shape == "molecule":
        d.line([8, 40, 24, 30, 40, 40, 56, 30], fill=color, width=3)
        d.rectangle([36, 18, 62, 50], outline=(220, 30, 30), width=2)
    else:
        for i in range(6):
            d.line([10 + i * 8, 60, 20 + i * 6, 6], fill=color, width=2)
    img.save(path, optimize=False)


def esc(s):
    return s.replace("\n", "\\n")


def options_block(options):
    return "\\n".join(f"{chr(65 + i)}. {o}" for i, o in enumerate(options))


def mini():
    (MINI / "images").mkdir(parents=True, exist_ok=True)
    rows = []
    for t in TASKS:
        image = f"images/{t['id']}.png"
        draw(MINI / image, t["color"], t["shape"])
        rows.append(json.dumps({"id": t["id"], "question": t["question"], "options": t["options"],
                                "images": [image], "gold": t["gold"],
                                "meta": {"benchmark": "mini", "subject": t["subject"]}}))
    (MINI / "tasks.jsonl").write_text("\n".join(rows) + "\n")


def mini_mock():
    out = ["# Scripted replies for fixtures/mini and fixtures/corpus.",
           "# The opener is the reasoner's own first message, so collaborative reasoner",
           "# replies start at index 1; index 0 repeats the opener for readability.",
           ""]
    for t in TASKS:
        q = t["question"]
        opts = options_block(t["options"])
        letter = t["gold"]
        out += [f"# {t['id']}", f"endpoint: perceiver", f"match: {q}", f"match: {SINGLE}",
                f"reply: I look at the image: {t['desc']}.\\n{esc(t['p'])}", ""]
        out += [f"endpoint: reasoner", f"match: {q}", f"match: {SINGLE}",
                f"think: No image is available, so I can only guess from the wording.",
                f"reply: Without the image I have to guess.\\n{t['rt']}", ""]
        out += [f"endpoint: reasoner_vision", f"match: {q}", f"match: {SINGLE}",
                f"think: Let me inspect the image and check each option.",
                f"reply: The image shows {t['desc']}.\\n{t['rv']}", ""]
        # Collaborative perceiver: description, four follow-up answers.
        out += [f"endpoint: perceiver", f"match: {q}", f"match: {COLLAB_PERCEIVER}",
                f"reply: The question is: {q}\\nOptions:\\n{opts}\\nThe image shows {t['desc']}."]
        out += [f"reply: {f}" for f in t["follow"]]
        out += [""]
        out += [f"endpoint: perceiver", f"match: {q}", f"match: {COLLAB_PERCEIVER}", f"match: {EXTRACT}",
                f"reply: {esc(t['c'])}", ""]
        out += [f"endpoint: reasoner", f"match: {q}", f"match: {COLLAB_REASONER}", f"reply: {OPENER}"]
        asks = ["Thanks. Can you describe the most important detail again?",
                "Is there anything unusual about it?",
                "Anything else I should know before deciding?",
                "Let me check one more thing: are you sure about that detail?"]
        if t.get("long_think"):
            out += ["think_tokens: 5000"]
        out += [f"reply: {a}" for a in asks]
        final = t["c"] if t["c"].startswith("Answer:") else "I cannot decide between the options."
        out += [f"think: Weighing the options against the description.",
                f"reply: Based on your description, my conclusion is: {final}", ""]
        # Single-turn ablation.
        out += [f"endpoint: perceiver", f"match: {q}", f"match: {TURN1_PERCEIVER}",
                f"reply: The question is: {q}\\nOptions:\\n{opts}\\nThe image shows {t['desc']}.", ""]
        out += [f"endpoint: perceiver", f"match: {q}", f"match: {TURN1_PERCEIVER}", f"match: {EXTRACT}",
                f"reply: {esc(t['st'])}", ""]
        out += [f"endpoint: reasoner", f"match: {q}", f"match: {TURN1_REASONER}", f"reply: {OPENER}",
                f"reply: From that single description: {' '.join(t['st'].splitlines())}", ""]
        assert letter
    return out


def corpus_mock():
    CORPUS.mkdir(parents=True, exist_ok=True)
    out = ["# Synthesis corpus; the teacher is the perceiver endpoint.", ""]
    manifest = ["# file,category"]
    for c in CORPUS_ITEMS:
        draw(CORPUS / c["file"], c["color"], "lines")
        manifest.append(f"{c['file']},{c['category']}")
        if c["question"] is None:
            out += [f"endpoint: perceiver", f"match: <question>", f"match: {c['file']}",
                    "reply: This image is too plain to ask anything about.", ""]
            continue
        q = c["question"]
        opts = options_block(c["options"])
        out += [f"endpoint: perceiver", f"match: <question>", f"match: {c['file']}",
                f"reply: <question>\\n{q}\\n</question>\\n<options>\\n{opts}\\n</options>", ""]
        out += [f"endpoint: perceiver", f"match: {q}", f"match: {SINGLE}",
                f"reply: Judging from the wording alone.\\n{c['text_only']}", ""]
        out += [f"endpoint: perceiver", f"match: {q}", f"match: {SINGLE}", f"match: {c['file']}",
                f"reply: Looking at the image.\\n{c['multimodal']}", ""]
        out += [f"endpoint: perceiver", f"match: {q}", f"match: {COLLAB_PERCEIVER}",
                f"reply: The question is: {q}\\nOptions:\\n{opts}\\nThe image is a small drawing.",
                "reply: It is a simple line drawing."]
        out += [""]
        out += [f"endpoint: perceiver", f"match: {q}", f"match: {COLLAB_REASONER}", f"reply: {OPENER}",
                "reply: What exactly does the drawing show?", ""]
        convs = c["conversations"]
        for i in range(8):
            reply = convs[min(i, len(convs) - 1)]
            out += [f"endpoint: perceiver", f"match: {q}", f"match: {COLLAB_PERCEIVER}", f"match: {EXTRACT}",
                    f"sample: {i}", f"reply: {reply}", ""]
    (CORPUS / "manifest.csv").write_text("\n".join(manifest) + "\n")
    return out


def main():
    mini()
    MOCKS.mkdir(exist_ok=True)
    lines = mini_mock() + corpus_mock()
    (MOCKS / "demo.mock").write_text("\n".join(lines).rstrip("\n") + "\n")


if __name__ == "__main__":
    main()
