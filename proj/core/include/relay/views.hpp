#pragma once

#include "relay/backend.hpp"
#include "relay/types.hpp"

namespace relay {

/// The perceiver's projection of a dialogue.
///
/// The first entry is the task itself (question, options, every image). The
/// opener, reasoner messages and the extraction prompt follow as counterpart
/// entries; perceiver messages are the perceiver's own. Adjacent counterpart
/// entries are joined with a blank line so the view alternates.
///
/// Throws ViewError if the transcript turns do not alternate sides.
AgentView make_perceiver_view(const TaskInstance& task, const Transcript& transcript, const DialogueConfig& config);

/// The reasoner's projection. Never carries images. The opener is the
/// reasoner's own first message; the extraction prompt is not shown.
AgentView make_reasoner_view(const Transcript& transcript, const DialogueConfig& config);

/// View for a single-model baseline: the question, options and the
/// single-model prompt; images only in SingleMultimodal mode.
AgentView make_single_view(const TaskInstance& task, DialogueMode mode, const DialogueConfig& config,
                           std::uint32_t max_tokens);

/// Generation params for one role given the dialogue config.
GenerationParams generation_params(const DialogueConfig& config, std::uint32_t max_tokens);

}  // namespace relay
