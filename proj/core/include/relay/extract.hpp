#pragma once

#include <span>
#include <string_view>

#include "relay/types.hpp"

namespace relay {

/// Pulls the chosen option letter out of a model's final reply.
///
/// 1. Strict: the last `Answer: L` in the text, where L is a valid option
///    letter. The keyword is case-sensitive; markdown such as `**Answer:** L`,
///    `Answer: (L)` or `Answer: **L**` is tolerated.
/// 2. Fallback: the last standalone valid option letter in the final
///    nonblank line.
/// 3. Otherwise Abstain.
///
/// `correct` is left unset; see score_verdict.
Verdict extract_answer(std::string_view text, std::span<const OptionEntry> options);

/// True when `text` contains a strict `Answer: L` for a valid letter.
bool has_strict_answer(std::string_view text, std::span<const OptionEntry> options);

}  // namespace relay
