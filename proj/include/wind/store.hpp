#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wind/tensor.hpp"

namespace wind {

/// Binary tensor file: magic "WNDT", u16 version, u16 dtype tag (1 = f32),
/// u32 dims c/h/w, little-endian payload.
void write_tensor(const LatentTensor& t, const std::string& path);
LatentTensor read_tensor(const std::string& path);

/// One line of the append-only generation log.
struct GenerationRecord {
    std::uint64_t timestamp = 0; // UTC seconds
    std::uint64_t seq = 0;
    std::uint64_t index = 0;
    std::uint64_t group = 0;
    std::uint64_t nonce = 0;
    std::string attack;          // provenance; empty at generation
    std::string config_fingerprint;
    std::uint64_t label_hash = 0; // opaque caller-provided prompt label
    std::string file;
};

/// Length-prefixed JSON lines ("<len> <json>\n"). A torn final record is
/// skipped on load and surfaced through truncated_tail().
class GenerationLog {
public:
    explicit GenerationLog(std::string path) : path_(std::move(path)) {}

    void append(const GenerationRecord& rec);

    std::vector<GenerationRecord> load() const;
    std::vector<GenerationRecord> query_index(std::uint64_t index) const;
    std::vector<GenerationRecord> query_time(std::uint64_t from, std::uint64_t to) const;

    /// Bytes of unparseable tail discarded by the last load, if any.
    std::size_t truncated_tail() const { return truncated_; }

private:
    std::string path_;
    mutable std::size_t truncated_ = 0;
};

} // namespace wind
