#pragma once

#include "relay/backend.hpp"
#include "relay/types.hpp"

namespace relay {

/// One-call baseline. SingleTextOnly sends no images; SingleMultimodal needs a
/// vision endpoint. The transcript holds the injected prompt and the model's
/// reply; a backend failure yields an aborted transcript scored as Abstain.
Transcript run_single(const TaskInstance& task, Backend& model, DialogueMode mode, const DialogueConfig& config);

/// The perceiver/reasoner dialogue.
///
///   opener (injected on the reasoner side)
///   max_turns x { perceiver reply, reasoner reply }
///   extraction prompt -> perceiver reply -> verdict
///
/// The loop always runs to max_turns unless `allow_early_stop` is set and the
/// reasoner writes a strict `Answer: L`. A backend failure stops the dialogue;
/// the partial transcript comes back marked aborted with an Abstain verdict.
/// Throws ViewError if the transcript ever stops alternating.
Transcript run_collaborative(const TaskInstance& task, Backend& perceiver, Backend& reasoner,
                             const DialogueConfig& config);

/// `config` restricted to one exchange, with the single-turn system prompts.
DialogueConfig single_turn_config(const DialogueConfig& config);

/// run_collaborative under single_turn_config.
Transcript run_singleturn_ablation(const TaskInstance& task, Backend& perceiver, Backend& reasoner,
                                   const DialogueConfig& config);

}  // namespace relay
