#include "hdrv/manifest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "hdrv/errors.hpp"

namespace hdrv {

namespace {

nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DecodeError(path.string() + ": cannot open");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

void save_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error(path.string() + ": cannot open for writing");
    out << j.dump(2) << "\n";
}

} // namespace

StackMetadata load_stack_metadata(const std::filesystem::path& path) {
    const nlohmann::json j = load_json(path);
    try {
        StackMetadata meta;
        meta.frame = j.at("frame").get<int>();
        meta.gamma = j.value("gamma", kDefaultGamma);
        for (const auto& s : j.at("shots")) {
            StackShotEntry e;
            e.ev = s.at("ev").get<int>();
            e.time_s = s.at("time_s").get<double>();
            e.file = s.at("file").get<std::string>();
            meta.shots.push_back(std::move(e));
        }
        return meta;
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

void save_stack_metadata(const StackMetadata& meta, const std::filesystem::path& path) {
    nlohmann::json j;
    j["frame"] = meta.frame;
    j["gamma"] = meta.gamma;
    j["shots"] = nlohmann::json::array();
    for (const auto& s : meta.shots)
        j["shots"].push_back({{"ev", s.ev}, {"time_s", s.time_s}, {"file", s.file}});
    save_json(j, path);
}

MultiExposureStack load_stack(const std::filesystem::path& dir) {
    const StackMetadata meta = load_stack_metadata(dir / kStackMetadataFile);
    MultiExposureStack stack;
    stack.frame_id = meta.frame;
    for (const auto& s : meta.shots) {
        ExposureSpec spec{s.ev, s.time_s, meta.gamma};
        stack.shots.emplace_back(spec, load_image(dir / s.file, Domain::LdrDisplay));
    }
    std::sort(stack.shots.begin(), stack.shots.end(),
              [](const auto& a, const auto& b) { return a.first.ev < b.first.ev; });
    return stack;
}

SequenceManifest load_sequence_manifest(const std::filesystem::path& path) {
    const nlohmann::json j = load_json(path);
    try {
        SequenceManifest m;
        m.pattern = j.at("pattern").get<std::vector<int>>();
        m.gamma = j.value("gamma", kDefaultGamma);
        for (const auto& f : j.at("frames")) {
            ManifestFrame e;
            e.index = f.at("index").get<int>();
            e.ev = f.at("ev").get<int>();
            e.time_s = f.at("time_s").get<double>();
            e.file = f.at("file").get<std::string>();
            m.frames.push_back(std::move(e));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

void save_sequence_manifest(const SequenceManifest& manifest,
                            const std::filesystem::path& path) {
    nlohmann::json j;
    j["pattern"] = manifest.pattern;
    j["gamma"] = manifest.gamma;
    j["frames"] = nlohmann::json::array();
    for (const auto& f : manifest.frames)
        j["frames"].push_back(
            {{"index", f.index}, {"ev", f.ev}, {"time_s", f.time_s}, {"file", f.file}});
    save_json(j, path);
}

AlternatingSequence load_sequence(const SequenceManifest& manifest,
                                  const std::filesystem::path& base_dir) {
    AlternatingSequence seq;
    seq.pattern = manifest.pattern;
    for (const auto& f : manifest.frames) {
        ExposureSpec spec{f.ev, f.time_s, manifest.gamma};
        seq.frames.emplace_back(load_image(base_dir / f.file, Domain::LdrDisplay), spec);
    }
    return seq;
}

} // namespace hdrv
