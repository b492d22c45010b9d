#include "wind/store.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace wind {

namespace {

constexpr char kTensorMagic[4] = {'W', 'N', 'D', 'T'};
constexpr std::uint16_t kTensorVersion = 1;
constexpr std::uint16_t kDtypeF32 = 1;

template <typename T>
void write_le(std::ofstream& f, T v) {
    std::uint8_t b[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = std::uint8_t(std::uint64_t(v) >> (8 * i));
    f.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& f) {
    std::uint8_t b[sizeof(T)];
    f.read(reinterpret_cast<char*>(b), sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return T(v);
}

} // namespace

void write_tensor(const LatentTensor& t, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("tensor write: cannot open " + path);
    f.write(kTensorMagic, 4);
    write_le(f, kTensorVersion);
    write_le(f, kDtypeF32);
    write_le(f, t.shape.c);
    write_le(f, t.shape.h);
    write_le(f, t.shape.w);
    static_assert(sizeof(float) == 4);
    for (float v : t.data) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        write_le(f, bits);
    }
    if (!f) throw std::runtime_error("tensor write: failed for " + path);
}

LatentTensor read_tensor(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("tensor read: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kTensorMagic, 4) != 0)
        throw std::runtime_error("tensor read: bad magic in " + path);
    if (read_le<std::uint16_t>(f) != kTensorVersion)
        throw std::runtime_error("tensor read: unsupported version");
    if (read_le<std::uint16_t>(f) != kDtypeF32)
        throw std::runtime_error("tensor read: unsupported dtype");
    TensorShape shape;
    shape.c = read_le<std::uint32_t>(f);
    shape.h = read_le<std::uint32_t>(f);
    shape.w = read_le<std::uint32_t>(f);
    if (!f || shape.elems() == 0 || shape.elems() > (std::size_t(1) << 30))
        throw std::runtime_error("tensor read: bad shape");
    LatentTensor t(shape);
    for (auto& v : t.data) {
        std::uint32_t bits = read_le<std::uint32_t>(f);
        std::memcpy(&v, &bits, 4);
    }
    if (!f) throw std::runtime_error("tensor read: truncated file " + path);
    return t;
}

namespace {

nlohmann::json to_json(const GenerationRecord& r) {
    return {{"ts", r.timestamp},  {"seq", r.seq},          {"index", r.index},
            {"group", r.group},   {"nonce", r.nonce},      {"attack", r.attack},
            {"config", r.config_fingerprint}, {"label", r.label_hash}, {"file", r.file}};
}

GenerationRecord from_json(const nlohmann::json& j) {
    GenerationRecord r;
    r.timestamp = j.at("ts").get<std::uint64_t>();
    r.seq = j.at("seq").get<std::uint64_t>();
    r.index = j.at("index").get<std::uint64_t>();
    r.group = j.at("group").get<std::uint64_t>();
    r.nonce = j.at("nonce").get<std::uint64_t>();
    r.attack = j.value("attack", "");
    r.config_fingerprint = j.value("config", "");
    r.label_hash = j.value("label", std::uint64_t(0));
    r.file = j.value("file", "");
    return r;
}

} // namespace

void GenerationLog::append(const GenerationRecord& rec) {
    std::string body = to_json(rec).dump();
    std::string line = std::to_string(body.size()) + " " + body + "\n";
    std::ofstream f(path_, std::ios::binary | std::ios::app);
    if (!f) throw std::runtime_error("log: cannot open " + path_);
    f.write(line.data(), std::streamsize(line.size()));
    f.flush();
    if (!f) throw std::runtime_error("log: append failed");
}

std::vector<GenerationRecord> GenerationLog::load() const {
    truncated_ = 0;
    std::vector<GenerationRecord> out;
    std::ifstream f(path_, std::ios::binary);
    if (!f) return out;
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t sp = content.find(' ', pos);
        if (sp == std::string::npos) break;
        std::size_t len = 0;
        try {
            len = std::stoull(content.substr(pos, sp - pos));
        } catch (...) {
            break;
        }
        std::size_t body_at = sp + 1;
        if (body_at + len + 1 > content.size()) break;       // torn record
        if (content[body_at + len] != '\n') break;           // length mismatch
        try {
            out.push_back(from_json(nlohmann::json::parse(content.substr(body_at, len))));
        } catch (...) {
            break;
        }
        pos = body_at + len + 1;
    }
    truncated_ = content.size() - pos;
    return out;
}

std::vector<GenerationRecord> GenerationLog::query_index(std::uint64_t index) const {
    std::vector<GenerationRecord> out;
    for (auto& r : load())
        if (r.index == index) out.push_back(r);
    return out;
}

std::vector<GenerationRecord> GenerationLog::query_time(std::uint64_t from,
                                                        std::uint64_t to) const {
    std::vector<GenerationRecord> out;
    for (auto& r : load())
        if (r.timestamp >= from && r.timestamp <= to) out.push_back(r);
    return out;
}

} // namespace wind
