#pragma once

#include <filesystem>
#include <string>

#include "relay/types.hpp"

namespace relay {

/// Line-delimited JSON, one record per line, each tagged with "kind":
/// header, turn, extraction_prompt, extraction_reply, verdict, aborted.
/// Output is byte-stable for equal transcripts.
std::string serialize_transcript(const Transcript& t);

/// Inverse of serialize_transcript. Throws FormatError with the line number.
Transcript parse_transcript(const std::string& text, const std::string& source = "<transcript>");

/// `<runs_root>/<run_id>/<task_id>.transcript`, with path-hostile characters
/// in the ids replaced by '_'.
std::filesystem::path transcript_path(const std::filesystem::path& runs_root, const std::string& run_id,
                                      const std::string& task_id);

/// Atomic write (temp file + rename); creates parent directories.
void write_transcript(const std::filesystem::path& path, const Transcript& t);
Transcript read_transcript(const std::filesystem::path& path);

/// Human-oriented rendering for the `transcript` command.
std::string format_transcript(const Transcript& t);

/// Writes `content` to `path` through a temp file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace relay
