"""Sample video content and the rule-based responder behind mock fixtures.

Everything the bundled sample assets need lives here: the transcript, the
canned hierarchy/criteria/description answers, and a responder that maps
pipeline requests to those answers. scripts/make_fixtures.py replays the
real pipeline against a recording backend built from this responder, so
fixture files never drift from the prompt builders.
"""

from __future__ import annotations

import json
import re

from .backends import BagOfWordsEmbedder, RecordingBackend
from .frames import SyntheticFrameSource
from .gateway import ModelGateway, ModelRequest, request_hash
from .transcript import TranscriptWord

SAMPLE_VIDEO_ID = "cookies.mp4"
SAMPLE_DURATION = 95.0
SAMPLE_TITLE = "Classic Chocolate Chip Cookies"

SAMPLE_METADATA = {
    "title": SAMPLE_TITLE,
    "ingredients": ["1 cup flour", "1/2 cup white sugar"],
    "tools": ["Mixing bowl", "Cup", "Spatula", "Whisk"],
}

# (text, role, start, end)
SAMPLE_SENTENCES = [
    ("Hey, I'm John Kanell.", "Greeting", 0.0, 2.0),
    ("Today we're making classic chocolate chip cookies.", "Overview", 2.0, 6.0),
    ("Add 1 cup of flour into the bowl.", "Method", 6.0, 11.0),
    ("Use precise measurements for the best results.", "Supplementary", 11.0, 14.0),
    ("Mix the mixture with a spatula until no residue flour is visible.", "Method", 14.0, 19.0),
    ("Hold the bowl with the other hand for stability.", "Supplementary", 19.0, 22.0),
    ("Let the dough rest for 30 minutes.", "Method", 22.0, 52.0),
    ("Resting the dough helps improve the texture of the cookies.", "Explanation", 52.0, 55.0),
    ("Add sugar and whisk.", "Method", 68.0, 73.0),
    ("So if you like this video, please give it a thumbs up and remember to subscribe.",
     "Miscellaneous", 73.0, 77.0),
    ("And that's it, enjoy your cookies.", "Conclusion", 77.0, 80.0),
]

HIERARCHY_RESPONSE = {
    "steps": [
        {
            "step_name": "Prepare Cookie Dough",
            "actions": [
                {
                    "instruction": "Add 1 cup of flour into the bowl.",
                    "supplementary": ["Use precise measurements for the best results."],
                    "start": 6.0,
                    "end": 11.0,
                },
                {
                    "instruction": "Mix the mixture with a spatula until no residue flour is visible.",
                    "supplementary": ["Hold the bowl with the other hand for stability."],
                    "start": 14.0,
                    "end": 19.0,
                },
                {
                    "instruction": "Let the dough rest for 30 minutes.",
                    "supplementary": ["Resting the dough helps improve the texture of the cookies."],
                    "start": 22.0,
                    "end": 52.0,
                },
            ],
            "tools": ["Cup", "Spatula", "Mixing bowl"],
            "materials": ["Flour"],
            "new_tools": ["Spatula"],
            "new_materials": ["Flour"],
        },
        {
            "step_name": "Sweeten and Combine",
            "actions": [
                {"instruction": "Add sugar.", "supplementary": [], "start": 68.0, "end": 73.0},
                {"instruction": "Whisk the mixture.", "supplementary": [], "start": 68.0, "end": 73.0},
            ],
            "tools": ["Whisk", "Mixing bowl"],
            "materials": ["Sugar"],
            "new_tools": ["Whisk"],
            "new_materials": ["Sugar"],
        },
    ]
}

# caption per timestamp band of the synthetic sample video
CAPTION_SEGMENTS = [
    (0, 5, "A person greets the camera in a bright kitchen."),
    (6, 13, "A person scoops flour into a mixing bowl with a measuring cup."),
    (14, 21, "A person stirs the mixture in the bowl with a spatula."),
    (22, 52, "A covered bowl of dough sits at rest on the counter."),
    (53, 67, "A close-up of the dough resting, covered, on the counter."),
    (68, 73, "A person whisks sugar into the mixture in the bowl."),
    (74, 95, "A person smiles and points at the finished cookies."),
]

DESCRIPTIONS = {
    "Add 1 cup of flour into the bowl.": (
        "The person scoops all-purpose flour into a shiny stainless steel 1-cup "
        "measuring cup, levels it off, and tips it into a large glass mixing bowl."
    ),
    "Mix the mixture with a spatula until no residue flour is visible.": (
        "The person stirs the dough with a red silicone spatula, scraping the "
        "sides of the glass bowl until no dry flour remains."
    ),
    "Let the dough rest for 30 minutes.": (
        "The person covers the glass bowl of dough with a cloth and sets it "
        "aside on the counter to rest."
    ),
    "Add sugar.": (
        "The person pours half a cup of white sugar from a measuring cup into "
        "the bowl."
    ),
    "Whisk the mixture.": (
        "The person whisks the sugar into the mixture with a metal balloon "
        "whisk until combined."
    ),
}

CRITERIA_RESPONSES = {
    "Prepare Cookie Dough": {
        "tools": ["Cup", "Spatula", "Mixing bowl"],
        "materials": ["1 cup flour"],
        "actions": [
            {
                "instruction": "Add 1 cup of flour into the bowl.",
                "type": "punctual",
                "completion_criteria": ["The flour is visible in the bowl."],
                "mistake_criteria": ["Flour spills outside the bowl."],
            },
            {
                "instruction": "Mix the mixture with a spatula until no residue flour is visible.",
                "type": "durative",
                "in_progress_criteria": ["The spatula is moving through the mixture."],
                "completion_criteria": ["No dry flour is visible in the mixture."],
                "mistake_criteria": ["Mixture is spilling over the rim of the bowl."],
            },
            {
                "instruction": "Let the dough rest for 30 minutes.",
                "type": "durative",
                "in_progress_criteria": ["The covered bowl is sitting undisturbed."],
                "completion_criteria": ["The dough looks slightly puffed after resting."],
                "nonvisual_completion_criteria": ["A 30 minute timer has finished."],
                "mistake_criteria": ["The bowl is uncovered while resting."],
            },
        ],
    },
    "Sweeten and Combine": {
        "tools": ["Whisk", "Mixing bowl"],
        "materials": ["1/2 cup white sugar"],
        "actions": [
            {
                "instruction": "Add sugar.",
                "type": "punctual",
                "completion_criteria": ["Sugar is visible on top of the mixture."],
                "mistake_criteria": ["Sugar spills outside the bowl."],
            },
            {
                "instruction": "Whisk the mixture.",
                "type": "durative",
                "in_progress_criteria": ["The whisk is moving through the mixture."],
                "completion_criteria": ["The mixture looks smooth and consistent."],
                "nonvisual_completion_criteria": ["Mixture feels smooth to the touch."],
                "mistake_criteria": ["Mixture is lumpy or too runny."],
            },
        ],
    },
}

# worked taxonomy examples: every sentence the classification prompt cites
TAXONOMY_EXAMPLES = [
    ("Hey, what's up you guys, Chef [...] here.", "Greeting"),
    ("Stay tuned, we'll catch you all later.", "Greeting"),
    ("Today, I'll show you a special technique which is totally special and about image pressing.", "Overview"),
    ("[...] Someone is making a very special valentine's day meal for another certain special someone.", "Overview"),
    ("I'm pretty sure that just taking a pencil and putting it over the front and then putting a bunch of rubber bands around the pencil [...] that's going to do it.", "Overview"),
    ("Now for the intricate layer that will give me the final webbing look.", "Method"),
    ("We're going to pour that into our silicone baking cups.", "Method"),
    ("I'm also going to use a pair of scissors, a glue stick, some fancy tape or some regular tape.", "Method"),
    ("I find that it's easier to do just a couple of layers at a time instead of all four layers at a time.", "Supplementary"),
    ("I don't know but I would say avoid using bleach if you can.", "Supplementary"),
    ("Because every time we wear our contact lenses, makeup and even dirt particles [...] might harm our eyes directly.", "Explanation"),
    ("And these will overhang a little to help hide the gap.", "Explanation"),
    ("Something sticky and dirty all through the back seat.", "Description"),
    ("[...] The process of putting on a tip by hand [...] takes a lot of patience but it can be done if you're in a pinch.", "Description"),
    ("These are awesome beans, creamy texture, slightly nutty loaded with flavor.", "Description"),
    ("And now we have a dinosaur taggy blanket that wrinkles, so a fun gift for any baby on your gift giving list.", "Conclusion"),
    ("However, I am still concerned about how safe rubbing alcohol actually is to use so maybe next time, I will give vodka a try.", "Conclusion"),
    ("Tristan is back from basketball - He made it on the team so it's pretty exciting.", "Miscellaneous"),
    ("So if you like this video, please give it a thumbs up and remember to subscribe.", "Miscellaneous"),
    ("And we're going to go ahead and get started.", "Miscellaneous"),
    ("Whoops.", "Miscellaneous"),
    ("Hey, I'm John Kanell.", "Greeting"),
    ("And today on Preppy Kitchen, we're making some quick and delicious cranberry orange muffins.", "Overview"),
]

INTENT_EXAMPLES = [
    ("go back", "navigation"),
    ("What's an easier way to do this?", "tips_workarounds"),
    ("Is it done yet?", "progress_feedback"),
    ("Which of these is salt?", "visual_qa"),
    ("What's half of 3/4 cup?", "nonvisual_knowledge"),
]

SAMPLE_SUGGESTION = (
    "Crack each egg into a separate small bowl first, then run your fingers "
    "through it to feel for shell pieces before adding it to the mixture."
)


def sample_words() -> list[TranscriptWord]:
    """Word-timestamped transcript: words of each sentence spread evenly
    over the sentence span."""
    words: list[TranscriptWord] = []
    for text, _role, start, end in SAMPLE_SENTENCES:
        tokens = text.split()
        span = (end - start) / len(tokens)
        for i, token in enumerate(tokens):
            w_start = round(start + i * span, 3)
            w_end = end if i == len(tokens) - 1 else round(start + (i + 1) * span, 3)
            words.append(TranscriptWord(text=token, start=w_start, end=w_end))
    return words


def sample_transcript_payload() -> dict:
    return {
        "words": [
            {"text": w.text, "start": w.start, "end": w.end} for w in sample_words()
        ]
    }


def caption_for_timestamp(timestamp: int) -> str:
    for lo, hi, caption in CAPTION_SEGMENTS:
        if lo <= timestamp <= hi:
            return caption
    return "An empty kitchen counter."


_ROLE_TABLE = {text: role for text, role, *_ in SAMPLE_SENTENCES}
_ROLE_TABLE.update(dict(TAXONOMY_EXAMPLES))
_INTENT_TABLE = dict(INTENT_EXAMPLES)

_SENTENCE_RE = re.compile(r"\nSentence: ([^\n]*)\nCategory:$")
_INSTRUCTION_RE = re.compile(r'The narrated instruction is: "(.*?)"\n')
_DIGEST_RE = re.compile(r"Frame digest: ([0-9a-f]{64})\.")
_UTTERANCE_RE = re.compile(r"\nUtterance: ([^\n]*)\nIntent:$")


class SampleResponder:
    """Answers pipeline requests for the bundled sample video."""

    def __init__(self, video_id: str = SAMPLE_VIDEO_ID, duration: float = SAMPLE_DURATION):
        self._ts_by_ref = SyntheticFrameSource.ref_map(video_id, duration)

    def __call__(self, request: ModelRequest):
        prompt = request.prompt
        match = _SENTENCE_RE.search(prompt)
        if match and "taxonomy" in prompt:
            return _ROLE_TABLE.get(match.group(1), "Miscellaneous")
        if prompt.startswith("This is a transcript of a tutorial video:"):
            return json.dumps(HIERARCHY_RESPONSE)
        match = _DIGEST_RE.search(prompt)
        if match and prompt.startswith("Describe the visible objects"):
            timestamp = self._ts_by_ref.get(match.group(1))
            if timestamp is None:
                return None
            return caption_for_timestamp(timestamp)
        match = _INSTRUCTION_RE.search(prompt)
        if match and "frames showing one action" in prompt:
            return DESCRIPTIONS.get(match.group(1))
        if prompt.startswith("This is information about a tutorial video:"):
            for step_name, response in CRITERIA_RESPONSES.items():
                if f'"step_name": "{step_name}"' in prompt:
                    return json.dumps(response)
            return None
        match = _UTTERANCE_RE.search(prompt)
        if match and prompt.startswith("Classify the user's utterance"):
            return _INTENT_TABLE.get(match.group(1), "nonvisual_knowledge")
        if prompt.startswith("Generate response to the following query"):
            return SAMPLE_SUGGESTION
        if prompt.startswith("You monitor a user performing:"):
            return json.dumps(
                {"status": "irrelevant", "rationale": "No task activity is visible."}
            )
        return None


def recording_gateway(
    responder=None, embed_dim: int = 256
) -> tuple[ModelGateway, RecordingBackend]:
    backend = RecordingBackend(responder or SampleResponder())
    gateway = ModelGateway(
        batch=backend,
        streamer=backend,
        embedder=BagOfWordsEmbedder(embed_dim),
        retries=0,
        backoff_s=0.0,
    )
    return gateway, backend


def fixture_entries(pairs: list[tuple[str, object]]) -> dict:
    """Build a fixture map from (prompt, response) pairs (no images)."""
    return {request_hash(prompt): value for prompt, value in pairs}


def bacon_plan() -> "CoachPlan":
    """Hand-enriched three-step demo plan used by the replay fixtures."""
    from .plan import Action, CoachPlan, Step, VideoInfo

    return CoachPlan(
        video=VideoInfo(title="Pan-Fried Bacon", duration_s=60.0),
        steps=[
            Step(
                step_name="Heat the Pan",
                actions=[
                    Action(
                        instruction="Heat the pan until it's hot.",
                        start=0.0,
                        end=10.0,
                        demonstration_description=(
                            "An empty black skillet sits on the front burner over medium heat."
                        ),
                        action_type="durative",
                        in_progress_criteria=["The pan is on the burner but not yet shimmering."],
                        completion_criteria=["Faint shimmer of heat is visible over the pan."],
                        nonvisual_completion_criteria=["A drop of water sizzles on contact."],
                        mistake_criteria=["The burner is on high and the pan is smoking."],
                    )
                ],
                tools=["Skillet", "Stove"],
                materials=[],
                new_tools=["Skillet", "Stove"],
                new_materials=[],
                start=0.0,
                end=10.0,
            ),
            Step(
                step_name="Cook the Bacon",
                actions=[
                    Action(
                        instruction="Add 8 strips of bacon to the pan.",
                        start=10.0,
                        end=15.0,
                        demonstration_description=(
                            "The person lays eight strips of bacon flat in the skillet "
                            "without overlapping."
                        ),
                        action_type="punctual",
                        completion_criteria=["Eight bacon strips are visible in the pan."],
                        mistake_criteria=["Bacon strips overlap in the pan."],
                    ),
                    Action(
                        instruction="Cook the bacon until evenly golden brown.",
                        start=15.0,
                        end=40.0,
                        demonstration_description=(
                            "The bacon sizzles in the skillet, gradually turning from "
                            "pink to golden brown."
                        ),
                        action_type="durative",
                        in_progress_criteria=["The bacon is pink and beginning to render."],
                        completion_criteria=["The bacon is evenly golden brown and crispy."],
                        nonvisual_completion_criteria=[
                            "The bacon feels crispy when prodded with a fork."
                        ],
                        mistake_criteria=["The bacon is burning and turning dark black."],
                    ),
                ],
                tools=["Skillet", "Tongs"],
                materials=["Bacon"],
                new_tools=["Tongs"],
                new_materials=["Bacon"],
                start=10.0,
                end=40.0,
            ),
            Step(
                step_name="Drain and Serve",
                actions=[
                    Action(
                        instruction="Transfer the bacon onto a paper towel.",
                        start=40.0,
                        end=45.0,
                        demonstration_description=(
                            "The person lifts each strip with tongs onto a plate lined "
                            "with a paper towel."
                        ),
                        action_type="punctual",
                        completion_criteria=["All strips are resting on the paper towel."],
                        mistake_criteria=["Bacon is dripping grease on the counter."],
                    )
                ],
                tools=["Tongs", "Plate"],
                materials=["Bacon", "Paper towel"],
                new_tools=["Plate"],
                new_materials=["Paper towel"],
                start=40.0,
                end=45.0,
            ),
        ],
    )


def state_machine_fixture_payload() -> dict:
    """Scripted run: irrelevant -> in_progress -> complete -> yes, a mistake
    injection, and a narration toggle, over a 40 s simulated session."""
    inputs: list[dict] = [
        {"at_s": float(t), "type": "frame", "payload": {"image_ref": f"frame{t:03d}"}}
        for t in range(1, 36)
    ]
    inputs += [
        {"at_s": 4.0, "type": "verdict",
         "payload": {"status": "irrelevant", "rationale": "The user is washing hands."}},
        {"at_s": 9.0, "type": "verdict",
         "payload": {"status": "in_progress",
                     "rationale": "The pan is warming; no shimmer yet."}},
        {"at_s": 14.0, "type": "verdict",
         "payload": {"status": "complete",
                     "rationale": "Faint shimmer of heat is visible over the pan."}},
        {"at_s": 17.0, "type": "command", "payload": {"name": "yes"}},
        {"at_s": 19.0, "type": "verdict",
         "payload": {"status": "in_progress",
                     "rationale": "Bacon strips are being laid in the pan."}},
        {"at_s": 22.0, "type": "command", "payload": {"name": "next"}},
        {"at_s": 24.0, "type": "verdict",
         "payload": {"status": "mistake",
                     "rationale": "The bacon is burning and turning dark black at the edges."}},
        {"at_s": 26.0, "type": "command", "payload": {"name": "narration_off"}},
        {"at_s": 29.0, "type": "verdict",
         "payload": {"status": "in_progress", "rationale": "The bacon is darkening further."}},
        {"at_s": 31.0, "type": "command", "payload": {"name": "narration_on"}},
        {"at_s": 34.0, "type": "verdict",
         "payload": {"status": "in_progress",
                     "rationale": "The bacon is turning golden at the center."}},
        {"at_s": 38.0, "type": "verdict",
         "payload": {"status": "complete",
                     "rationale": "The bacon is evenly golden brown and crispy."}},
    ]
    inputs.sort(key=lambda e: e["at_s"])
    return {"duration_s": 40.0, "inputs": inputs}


def scheduler_fixture_payload() -> dict:
    """Frames at 1 Hz over a 60 s session; no scripted verdicts."""
    return {
        "duration_s": 60.0,
        "inputs": [
            {"at_s": float(t), "type": "frame", "payload": {"image_ref": f"frame{t:03d}"}}
            for t in range(1, 61)
        ],
    }


def serve_demo_fixture() -> dict:
    """Mock fixtures for a served demo session on the three-step plan.

    One monitoring tick is fixtured: after the console has sent the demo
    frame bytes (literal b"frame-bytes"), the next tick judges the first
    action complete, so the confirmation flow is drivable over the wire.
    """
    import hashlib

    from .prompts import verdict_prompt

    plan = bacon_plan()
    action = plan.steps[0].actions[0]
    frame_ref = hashlib.sha256(b"frame-bytes").hexdigest()
    prompt = verdict_prompt(
        action.instruction,
        action.action_type,
        action.in_progress_criteria,
        action.completion_criteria,
        action.mistake_criteria,
        "",
        1,
    )
    verdict = json.dumps(
        {
            "status": "complete",
            "rationale": "Faint shimmer of heat is visible over the pan.",
        }
    )
    return {request_hash(prompt, [frame_ref]): verdict}


EVAL_FRAME_LABELS = [
    # frame_id, action_id, action_type, fov, gold_status
    ("f01", "a1", "punctual", "narrow", "irrelevant"),
    ("f02", "a1", "punctual", "narrow", "complete"),
    ("f03", "a1", "punctual", "narrow", "complete"),
    ("f04", "a1", "punctual", "narrow", "complete"),
    ("f05", "a2", "iterative", "narrow", "in_progress"),
    ("f06", "a2", "iterative", "narrow", "in_progress"),
    ("f07", "a2", "iterative", "narrow", "complete"),
    ("f08", "a2", "iterative", "narrow", "complete"),
    ("f09", "a3", "durative", "wide", "in_progress"),
    ("f10", "a3", "durative", "wide", "in_progress"),
    ("f11", "a3", "durative", "wide", "complete"),
    ("f12", "a3", "durative", "wide", "complete"),
]

EVAL_VERDICTS = {
    "f01": "irrelevant",
    "f02": "complete",
    "f03": "in_progress",
    "f04": "mistake",
    "f05": "in_progress",
    "f06": "in_progress",
    "f07": "complete",
    "f08": "irrelevant",
    "f09": "in_progress",
    "f10": "in_progress",
    "f11": "complete",
    "f12": "complete",
}

EVAL_DESC_CASES = [
    {
        "generated": ["The pan is hot", "The pan is oiled"],
        "narration": ["The pan is hot"],
        "reference": ["The pan is hot", "The pan is oiled", "Eight strips are added"],
        "labels": [],
    },
    {
        "generated": ["The dough is smooth"],
        "narration": ["The dough is smooth"],
        "reference": ["The dough is smooth"],
        "labels": [],
    },
    {
        "generated": "The pan is hot and oiled. The bacon sizzles. The lid is on.",
        "narration": "The pan is hot.",
        "reference": "The pan is hot and oiled. The bacon sizzles loudly.",
        "labels": ["The lid is on"],
    },
]
