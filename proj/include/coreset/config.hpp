#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "coreset/curriculum.hpp"
#include "coreset/synth.hpp"
#include "coreset/trainer.hpp"

namespace coreset {

// Everything a full run needs, assembled from one config file.  Defaults are
// chosen so that an empty config is already runnable; seeds and paths arrive
// separately (command line), never from the file.
struct RunConfig {
    SynthConfig synth;
    CurriculumConfig curriculum;  // holds the prune settings and probe schedule
    TrainerHyper trainer;
    std::size_t d_emb = 8;
};

RunConfig default_run_config();

// Strict 'key = value' file with '#' comments and [synth] / [prune] /
// [curriculum] / [trainer] / [probe] sections.  Unknown sections or keys,
// malformed values, and out-of-range values all throw FormatError naming the
// line number.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::filesystem::path& path);

// FNV-1a over the raw config text; stamped into output provenance headers.
std::uint64_t config_text_hash(const std::string& text);

}  // namespace coreset
