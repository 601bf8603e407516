#pragma once

#include <string>
#include <vector>

#include "hdrv/radiometry.hpp"

namespace hdrv {

/// Per-frame-directory stack metadata file name.
inline constexpr const char* kStackMetadataFile = "stack.json";

struct StackShotEntry {
    int ev = 0;
    double time_s = 1.0;
    std::string file; // relative to the stack directory
};

/// Schema: {"frame": int, "shots": [{"ev": int, "time_s": float, "file": str}...],
///          "gamma": float}
struct StackMetadata {
    int frame = 0;
    double gamma = kDefaultGamma;
    std::vector<StackShotEntry> shots;
};

StackMetadata load_stack_metadata(const std::filesystem::path& path);
void save_stack_metadata(const StackMetadata& meta, const std::filesystem::path& path);

/// Load metadata plus shot images from a frame directory.
MultiExposureStack load_stack(const std::filesystem::path& dir);

struct ManifestFrame {
    int index = 0;
    int ev = 0;
    double time_s = 1.0;
    std::string file; // relative to the manifest directory
};

/// Schema: {"pattern": [int...], "gamma": float,
///          "frames": [{"index": int, "ev": int, "time_s": float, "file": str}...]}
struct SequenceManifest {
    std::vector<int> pattern;
    double gamma = kDefaultGamma;
    std::vector<ManifestFrame> frames;
};

SequenceManifest load_sequence_manifest(const std::filesystem::path& path);
void save_sequence_manifest(const SequenceManifest& manifest,
                            const std::filesystem::path& path);

/// Load the frames listed in a manifest (paths resolved against base_dir).
AlternatingSequence load_sequence(const SequenceManifest& manifest,
                                  const std::filesystem::path& base_dir);

} // namespace hdrv
