"""Two-shot prompt template that pins the step-marker and final-answer format.

Completers are not assumed to be fine-tuned on math data, so the prompt
shows two worked solutions that demonstrate the required output shape:
numbered "Step n:" markers and a single closing "The final answer is"
statement.
"""

from __future__ import annotations

SYSTEM_PROMPT = (
    "You are a powerful agent with broad math knowledge and good at accurate "
    "calculation on math equations.Below is an instruction that describes a task. "
    "Continue to finish the response that appropriately completes the request "
    "within a maximum of 40 steps. When outputting each step, mark the sequence "
    "number of each step at the beginning, and explicitly state the final answer "
    "after the final step following the format 'The final answer is:'. After "
    "outputting the final answer only once, be sure to stop outputting."
)

EXAMPLE_1_INSTRUCTION = (
    "If the lengths of two sides of a right triangle are 5 and 12 units, what is "
    "the least possible length, in units, of the third side? Express your answer "
    "in simplest radical form."
)

EXAMPLE_1_RESPONSE = """Let's think step by step.

Step 1:I know that the Pythagorean theorem relates the lengths of the sides of a right triangle by the equation $a^2 + b^2 = c^2$, where c is the hypotenuse and a and b are the legs.

Step 2:Since I don't know which side is the hypotenuse, I'll try both possibilities and see which one gives me a smaller value for the third side.

Step 3:If I assume that the hypotenuse is $12$, then the other leg must satisfy $5^2 + b^2 = 12^2$, or $b^2 = 144 - 25 = 119$.

Step 4:Taking the square root of both sides, I get $b = \\sqrt{119}$, which is already in simplest radical form.

Step 5:If I assume that the hypotenuse is the unknown side, then it must satisfy $5^2 + 12^2 = c^2$, or $c^2 = 25 + 144 = 169$.

Step 6:Taking the square root of both sides, I get $c = \\sqrt{169} = 13$.

Step 7:Comparing the two values, I see that $\\sqrt{119}$ is smaller than $13$, since $119$ is smaller than $169$.The final answer is $119$."""

EXAMPLE_2_INSTRUCTION = (
    "A square has sides of length 10, and a circle centered at one of its "
    "vertices has radius 10. What is the area of the union of the regions "
    "enclosed by the square and the circle? Express your answer in terms of $\\pi$."
)

EXAMPLE_2_RESPONSE = """Let's think step by step.

Step 1:I want to find the area of the shaded region in this picture, where the blue is the square and the red is the circle.

Step 2:I notice that the circle and the square share a quarter of the circle's area, which is $\\frac{1}{4}\\pi r^2$, where $r = 10$.

Step 3:So I can subtract that from the sum of the areas of the circle and the square to get the area of the union.

Step 4:The area of the circle is $\\pi r^2 = 100\\pi$, and the area of the square is $s^2 = 100$, where $s = 10$.

Step 5:So the area of the union is $100\\pi + 100 - \\frac{1}{4}100\\pi = 100 + \\frac{3}{4}100\\pi$.

Step 6:The final answer is: $100 + \\frac{3}{4}100\\pi$."""


def build_prompt(question: str, steps: list[str] | tuple[str, ...] = ()) -> str:
    """Render the completion prompt for a question with an optional prefix.

    The prefix steps are appended as the assistant's partial response, so
    the completer continues from exactly that state.
    """
    parts = [
        SYSTEM_PROMPT,
        "",
        f"Instruction: {EXAMPLE_1_INSTRUCTION}",
        "",
        f"Response: {EXAMPLE_1_RESPONSE}",
        "",
        f"Instruction: {EXAMPLE_2_INSTRUCTION}",
        "",
        f"Response: {EXAMPLE_2_RESPONSE}",
        "",
        f"Instruction: {question}",
        "",
        "Response: Let's think step by step.",
    ]
    prompt = "\n".join(parts)
    if steps:
        prompt += "\n\n" + "\n\n".join(steps) + "\n\n"
    else:
        prompt += "\n\n"
    return prompt
