"""Prompt builders for every model-facing stage.

Fixture files key mock responses by a hash over the exact prompt text, so
any edit here requires regenerating fixtures (scripts/make_fixtures.py).
"""

from __future__ import annotations

from typing import Sequence

ROLE_TAXONOMY_PROMPT = """Given the definitions of the taxonomy, classify the provided sentence into one of the eight categories: [Greeting, Overview, Method, Supplementary, Explanation, Description, Conclusion, and Miscellaneous]. Do not add sub category.

1. Greeting
Opening: Starting remarks and instructor/channel introductions.
Example: "Hey, what's up you guys, Chef [...] here."
Closing: Parting remarks and wrap-up.
Example: "Stay tuned, we'll catch you all later."

2. Overview
Goal: Main purpose of the video and its descriptions.
Example: "Today, I'll show you a special technique which is totally special and about image pressing."
Motivation: Reasons or background information on why the video was created.
Example: "[...] Someone is making a very special valentine's day meal for another certain special someone."
Briefing: Rundown of how the goal will be achieved.
Example: "I'm pretty sure that just taking a pencil and putting it over the front and then putting a bunch of rubber bands around the pencil [...] that's going to do it."

3. Method
Subgoal: Objective of a subsection.
Example: "Now for the intricate layer that will give me the final webbing look."
Instruction: Actions that the instructor performs to complete the task.
Example: "We're going to pour that into our silicone baking cups."
Tool: Introduction of the materials, ingredients, and equipment to be used.
Example: "I'm also going to use a pair of scissors, a glue stick, some fancy tape or some regular tape."

4. Supplementary
Tip: Additional instructions or information that makes instructions easier, faster, or more efficient.
Example: "I find that it's easier to do just a couple of layers at a time instead of all four layers at a time."
Warning: Actions that should be avoided.
Example: "I don't know but I would say avoid using bleach if you can."

5. Explanation
Justification: Reasons why the instruction was performed.
Example: "Because every time we wear our contact lenses, makeup and even dirt particles [...] might harm our eyes directly."
Effect: Consequences of the instruction.
Example: "And these will overhang a little to help hide the gap."

6. Description
Status: Descriptions of the current state of the target object.
Example: "Something sticky and dirty all through the back seat."
Context: Descriptions of the method or the setting.
Example: "[...] The process of putting on a tip by hand [...] takes a lot of patience but it can be done if you're in a pinch."
Tool Specification: Descriptions of the tools and equipment.
Example: "These are awesome beans, creamy texture, slightly nutty loaded with flavor."

7. Conclusion
Outcome: Descriptions of the final results of the procedure.
Example: "And now we have a dinosaur taggy blanket that wrinkles, so a fun gift for any baby on your gift giving list."
Reflection: Summary, evaluation, and suggestions for the future about the overall procedure.
Example: "However, I am still concerned about how safe rubbing alcohol actually is to use so maybe next time, I will give vodka a try."

8. Miscellaneous
Side Note: Personal stories, jokes, user engagement, and advertisements.
Example: "Tristan is back from basketball - He made it on the team so it's pretty exciting."
Self-promotion: Promotion of the instructor of the channel (i.e. likes, subscription, notification, or donations).
Example: "So if you like this video, please give it a thumbs up and remember to subscribe."
Bridge: Meaningless phrases or expressions that connect different sections.
Example: "And we're going to go ahead and get started."
Filler: Conventional filler words.
Example: "Whoops."

EXAMPLES:
Sentence: Hey, I'm John Kanell.
Category: Greeting

Sentence: And today on Preppy Kitchen, we're making some quick and delicious cranberry orange muffins.
Category: Overview
"""


def role_prompt(sentence: str) -> str:
    return f"{ROLE_TAXONOMY_PROMPT}\nSentence: {sentence}\nCategory:"


_HIERARCHY_RULES = """Output a JSON object with a "steps" list that segments this into high-level steps. For each step, include:
- step_name
- actions: a list of action objects containing:
  - instruction (single atomic verb)
  - supplementary (relevant tips, warnings, explanations)
  - start and end times

Use entries with the Method role as the main instruction. Supplement with other roles (tip, warning, explanation, etc).
Make instructions specific and actionable: include measurements (e.g., "Add 1.5 cups of ...") and tools ("Mix using a spatula ...").

Important:
- Each instruction must be a clear, single-sentence action centered around one verb.
- Split instructions with multiple actions (e.g., "Add sugar and whisk" -> two separate actions).
- Split iterative actions over different materials (e.g., "Add salt, sugar, and vanilla extract" -> three actions).
- Merge only if instructions describe the same event.
- If multiple actions are in one sentence, assign the same timestamp to each.
- Some steps may have no actions if no method-role content is present.
- A step's start time = first action's start; end time = last action's end; next step starts at previous step's end.

Also include:
- tools: all tools used in this step
- materials: all materials/ingredients used in this step
- new_tools, new_materials: any tools/materials not used in the previous step

Do not hallucinate. Only use provided information.

Example step:
{
  "step_name": "Prepare Cookie Dough",
  "actions": [
    {"instruction": "Add 1 cup of flour into the bowl.", "supplementary": ["Use precise measurements for the best results."], "start": 0.0, "end": 5.0},
    {"instruction": "Mix the mixture with a spatula until no residue flour is visible.", "supplementary": ["Hold the bowl with the other hand for stability."], "start": 5.0, "end": 10.0},
    {"instruction": "Let the dough rest for 30 minutes.", "supplementary": ["Resting the dough helps improve the texture of the cookies."], "start": 10.0, "end": 40.0}
  ],
  "tools": ["Cup", "Spatula", "Mixing bowl"],
  "materials": ["Flour"],
  "new_tools": ["Spatula"],
  "new_materials": ["Flour"],
  "start": 0.0,
  "end": 40.0
}
"""


def hierarchy_prompt(transcript_lines: Sequence[str], metadata: str = "") -> str:
    transcript_data = "\n".join(transcript_lines)
    parts = [f'This is a transcript of a tutorial video: "{transcript_data}".']
    if metadata:
        parts.append(f'This is the metadata for this tutorial: "{metadata}".')
        parts.append("Prioritize metadata if the images look different than the metadata.")
    parts.append(_HIERARCHY_RULES)
    return "\n".join(parts)


DESCRIPTION_QUESTIONS = (
    "What is the demonstrated action?",
    "Which ingredients are used, how do they look, and how much is being used?",
    "Which tools are used, and how do they look?",
    "How is the action performed?",
    "Are there any tips for performing this action evident from the images?",
)


def description_prompt(instruction: str, narration: str, n_frames: int) -> str:
    questions = "\n".join(f"{i + 1}. {q}" for i, q in enumerate(DESCRIPTION_QUESTIONS))
    return (
        f"You are given {n_frames} frames showing one action from a tutorial video.\n"
        f'The narrated instruction is: "{instruction}"\n'
        f'Surrounding narration: "{narration}"\n\n'
        "Write a concise demonstration description for a learner who cannot see "
        "the video, by answering:\n"
        f"{questions}\n\n"
        "Describe only task-relevant content. Do not mention the presenter's "
        "appearance, clothing, the background, or camera angles."
    )


def caption_prompt(image_ref: str) -> str:
    return (
        "Describe the visible objects, tools, ingredients, and the action in this "
        "single video frame in one sentence. Ignore the presenter's appearance and "
        f"the background. Frame digest: {image_ref}."
    )


def criteria_prompt(step_payload: str, metadata: str = "") -> str:
    amounts = (
        f"\nAlso, extract tools and materials used in this step. If available, "
        f"include precise amounts from:\n{metadata}\n"
        if metadata
        else "\nAlso, extract tools and materials used in this step.\n"
    )
    return (
        f'This is information about a tutorial video: "{step_payload}". '
        "Output a JSON object that consists of the following attributes: "
        "tools, materials, actions.\n\n"
        "For each action, specify an action type between: punctual, iterative, and durative.\n"
        'Punctual actions are brief and occur at a specific moment (e.g., "Put 1 cup of flour").\n'
        'Iterative actions involve repetition or multiple quantities (e.g., "Add 2 rounded teaspoons").\n'
        'Durative actions extend over time and involve continuous motion (e.g., "Whisk the mixture").\n\n'
        "For each action, specify:\n"
        "in_progress_criteria - visual indicators the action is ongoing;\n"
        "completion_criteria - visual signs that the action is finished;\n"
        "mistake_criteria - possible visual errors;\n"
        'nonvisual_completion_criteria - (optional) sensory cues for completion (e.g., "feels crispy").\n\n'
        "Note:\n"
        "- Punctual actions should not include in_progress_criteria.\n"
        '- completion_criteria should be grounded in the instruction (e.g., "until brown").\n'
        "- in_progress_criteria should not overlap with completion_criteria.\n"
        "- Only use information provided. Do not hallucinate.\n"
        f"{amounts}\n"
        "Example output:\n"
        "{\n"
        '  "tools": ["whisk", "bowl"],\n'
        '  "materials": ["1 1/3 cups AP flour", "1/2 cup white sugar", "butter"],\n'
        '  "actions": [\n'
        '    {"instruction": "Put 1 cup of flour into the bowl.", "type": "punctual", '
        '"completion_criteria": ["The flour is visible in the bowl."], '
        '"mistake_criteria": ["Flour spills outside the bowl."]},\n'
        '    {"instruction": "Add 3 eggs into the mixture.", "type": "iterative", '
        '"in_progress_criteria": ["One or two eggs are visible in the bowl, but not all three."], '
        '"completion_criteria": ["All three eggs are visible in the bowl."], '
        '"mistake_criteria": ["More than three eggs added", "Eggshell is visible."]},\n'
        '    {"instruction": "Whisk the mixture until it is smooth.", "type": "durative", '
        '"in_progress_criteria": ["The whisk is moving through the mixture."], '
        '"completion_criteria": ["The mixture looks smooth and consistent."], '
        '"nonvisual_completion_criteria": ["Mixture feels smooth to the touch."], '
        '"mistake_criteria": ["Mixture is lumpy or too runny."]}\n'
        "  ]\n"
        "}"
    )


def rag_prompt(user_info: str, action: str, context: str) -> str:
    return (
        "Generate response to the following query with the given context. "
        'If there is no relevant information, say "I don\'t know".\n'
        f"User_info: {user_info}\n"
        f"Query: User is currently performing {action}, what are useful tips and workarounds?\n"
        f"Context: {context}\n"
        "Response:"
    )


def rag_query(action: str, user_info: str) -> str:
    """Retrieval query text: the tip request plus the serialized profile."""
    query = f"User is currently performing {action}, what are useful tips and workarounds?"
    if user_info:
        query += f"\nUser context: {user_info}"
    return query


INTENT_LABELS = (
    "navigation",
    "tips_workarounds",
    "progress_feedback",
    "visual_qa",
    "nonvisual_knowledge",
)


def intent_prompt(utterance: str, state_summary: str) -> str:
    return (
        "Classify the user's utterance into exactly one intent type. The user is "
        "mid-task and may speak explicitly or implicitly.\n\n"
        "Intent types:\n"
        '- navigation: move between steps or repeat instructions (e.g., "go back", '
        '"repeat that", "next step").\n'
        '- tips_workarounds: requests for accessible suggestions (e.g., "What\'s an '
        'easier way to do this?").\n'
        '- progress_feedback: asking whether the current action is done or on track '
        '(e.g., "Does this look ready?", "Is it done yet?").\n'
        '- visual_qa: questions about what the camera sees (e.g., "Which of these is '
        'salt?", "What\'s the expiration date?", implicit: "I can\'t tell which of '
        'these is sugar").\n'
        '- nonvisual_knowledge: broader questions needing no camera (e.g., "How do I '
        'use a zester?", "What\'s half of 3/4 cup?").\n\n'
        f"Current task state: {state_summary}\n"
        f"Utterance: {utterance}\n"
        "Intent:"
    )


def verdict_prompt(
    instruction: str,
    action_type: str,
    in_progress_criteria: Sequence[str],
    completion_criteria: Sequence[str],
    mistake_criteria: Sequence[str],
    last_status: str,
    n_frames: int,
) -> str:
    def bullet(items: Sequence[str]) -> str:
        return "\n".join(f"- {c}" for c in items) if items else "- (none)"

    return (
        f"You monitor a user performing: \"{instruction}\" ({action_type} action).\n"
        f"You see the {n_frames} most recent frames from their camera.\n\n"
        f"In-progress criteria:\n{bullet(in_progress_criteria)}\n"
        f"Completion criteria:\n{bullet(completion_criteria)}\n"
        f"Mistake criteria:\n{bullet(mistake_criteria)}\n\n"
        f"Previous status: {last_status or '(none)'}\n\n"
        "Classify the user's current status as one of: irrelevant, in_progress, "
        "complete, mistake. Use irrelevant when the frames show unrelated or "
        "impromptu activity. Reply with JSON only: "
        '{"status": ..., "rationale": "grounded in the criteria", '
        '"repetition_count": <integer, iterative actions only>}'
    )


def visual_qa_prompt(question: str) -> str:
    return (
        "Answer the user's question using only the attached recent camera frames. "
        "The user cannot see, so describe locations relative to them and be "
        f"specific. Question: {question}"
    )


def knowledge_prompt(question: str, plan_context: str) -> str:
    return (
        "Answer the user's question. Use the task context when relevant; no camera "
        f"frames are attached.\nTask context: {plan_context}\n"
        f"Question: {question}\nAnswer:"
    )


def narration_prompt(instruction: str, n_frames: int) -> str:
    return (
        f"The user is performing: \"{instruction}\". Using the {n_frames} most "
        "recent camera frames, narrate their visible progress in one short, "
        "concrete sentence."
    )
