# Prompt learner package: meta-network and prompt assembly
from promptssl.prompts.assembly import (
    assemble_prompt,
    encode_class_prompts,
    prompt_embedding,
)
from promptssl.prompts.common import PromptBundle, PromptError, PromptInit
from promptssl.prompts.meta_network import (
    MetaNetwork,
    default_hidden_width,
    generate_context,
)

__all__ = [
    "MetaNetwork",
    "PromptBundle",
    "PromptError",
    "PromptInit",
    "assemble_prompt",
    "default_hidden_width",
    "encode_class_prompts",
    "generate_context",
    "prompt_embedding",
]
