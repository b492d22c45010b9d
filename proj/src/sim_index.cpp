#include "wind/sim_index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "wind/sha256.hpp"

namespace wind {

Fingerprint spec_fingerprint(const CodebookSpec& spec) {
    Sha256 h;
    const char* tag = "wind.spec.fp.v1";
    h.update(tag, std::strlen(tag));
    auto le64 = [&](std::uint64_t v) {
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = std::uint8_t(v >> (8 * i));
        h.update(b, 8);
    };
    le64(spec.n);
    le64(spec.m);
    le64(spec.shape.c);
    le64(spec.shape.h);
    le64(spec.shape.w);
    auto salt_digest = Sha256::hash(spec.salt);
    h.update(salt_digest.data(), salt_digest.size());
    return h.finish();
}

void SketchIndex::regen_projection(TensorShape shape) {
    const std::size_t d = shape.elems();
    projection_.resize(k_dims_, Eigen::Index(d));
    for (std::uint32_t r = 0; r < k_dims_; ++r) {
        GaussianStream gs(tagged_seed("wind.index.proj", {projection_seed_, r}));
        for (std::size_t j = 0; j < d; ++j) projection_(r, Eigen::Index(j)) = float(gs.next());
    }
}

Eigen::VectorXf SketchIndex::project(const LatentTensor& t) const {
    Eigen::Map<const Eigen::VectorXf> v(t.data.data(), Eigen::Index(t.data.size()));
    Eigen::VectorXf s = projection_ * v;
    float n = s.norm();
    if (n > 0) s /= n;
    return s;
}

SketchIndex SketchIndex::build(const CodebookSpec& spec, std::uint32_t k_dims,
                               std::uint64_t projection_seed, std::uint32_t n_threads) {
    spec.validate();
    const std::size_t d = spec.shape.elems();
    if (k_dims == 0 || k_dims > d) throw std::invalid_argument("index: need 1 <= k_dims <= d");

    SketchIndex idx;
    idx.k_dims_ = k_dims;
    idx.n_ = spec.n;
    idx.projection_seed_ = projection_seed;
    idx.fingerprint_ = spec_fingerprint(spec);
    idx.regen_projection(spec.shape);
    idx.sketches_.resize(Eigen::Index(spec.n), k_dims);

    std::uint32_t threads = n_threads ? n_threads : std::max(1u, std::thread::hardware_concurrency());
    const Eigen::Index di = Eigen::Index(d);
    auto worker = [&](std::uint64_t begin, std::uint64_t end) {
        constexpr std::uint64_t kBlock = 64;
        RowMatrixXf block(Eigen::Index(kBlock), di);
        for (std::uint64_t b = begin; b < end; b += kBlock) {
            std::uint64_t cnt = std::min(kBlock, end - b);
            for (std::uint64_t r = 0; r < cnt; ++r) {
                LatentTensor z = sample_noise(derive_seed(b + r, spec.salt, spec.n), spec.shape);
                std::memcpy(block.row(Eigen::Index(r)).data(), z.data.data(), d * sizeof(float));
            }
            RowMatrixXf s = block.topRows(Eigen::Index(cnt)) * idx.projection_.transpose();
            for (std::uint64_t r = 0; r < cnt; ++r) {
                float n = s.row(Eigen::Index(r)).norm();
                if (n > 0) s.row(Eigen::Index(r)) /= n;
                idx.sketches_.row(Eigen::Index(b + r)) = s.row(Eigen::Index(r));
            }
        }
    };
    if (threads <= 1 || spec.n < 256) {
        worker(0, spec.n);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t chunk = (spec.n + threads - 1) / threads;
        chunk = ((chunk + 63) / 64) * 64; // block-aligned shards
        for (std::uint32_t t = 0; t < threads; ++t) {
            std::uint64_t lo = std::min<std::uint64_t>(spec.n, t * chunk);
            std::uint64_t hi = std::min<std::uint64_t>(spec.n, lo + chunk);
            if (lo < hi) pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return idx;
}

std::vector<std::uint64_t> SketchIndex::query(const LatentTensor& q, std::uint32_t top_k) const {
    if (top_k == 0) throw std::invalid_argument("index query: top_k must be >= 1");
    if (q.data.size() != std::size_t(projection_.cols()))
        throw std::invalid_argument("index query: dimension mismatch");
    Eigen::VectorXf s = project(q);
    Eigen::VectorXf scores = sketches_ * s;
    const std::uint64_t k = std::min<std::uint64_t>(top_k, n_);
    std::vector<std::uint64_t> order(n_);
    for (std::uint64_t i = 0; i < n_; ++i) order[i] = i;
    std::partial_sort(order.begin(), order.begin() + std::ptrdiff_t(k), order.end(),
                      [&](std::uint64_t a, std::uint64_t b) {
                          float sa = scores[Eigen::Index(a)], sb = scores[Eigen::Index(b)];
                          return sa > sb || (sa == sb && a < b);
                      });
    order.resize(k);
    return order;
}

namespace {

constexpr char kMagic[4] = {'W', 'N', 'D', 'X'};
constexpr std::uint16_t kVersion = 1;

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

void SketchIndex::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("index save: cannot open " + path);
    f.write(kMagic, 4);
    write_le(f, kVersion);
    write_le(f, k_dims_);
    write_le(f, n_);
    write_le(f, projection_seed_);
    f.write(reinterpret_cast<const char*>(fingerprint_.data()), 32);
    static_assert(sizeof(float) == 4);
    for (std::uint64_t i = 0; i < n_; ++i)
        f.write(reinterpret_cast<const char*>(sketches_.row(Eigen::Index(i)).data()),
                std::streamsize(k_dims_) * 4);
    if (!f) throw std::runtime_error("index save: write failed");
}

SketchIndex SketchIndex::load(const std::string& path, const CodebookSpec& expected_spec) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("index load: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("index load: bad magic");
    auto version = read_le<std::uint16_t>(f);
    if (version != kVersion) throw std::runtime_error("index load: unsupported version");
    SketchIndex idx;
    idx.k_dims_ = read_le<std::uint32_t>(f);
    idx.n_ = read_le<std::uint64_t>(f);
    idx.projection_seed_ = read_le<std::uint64_t>(f);
    f.read(reinterpret_cast<char*>(idx.fingerprint_.data()), 32);
    if (idx.fingerprint_ != spec_fingerprint(expected_spec))
        throw std::runtime_error("index load: stale fingerprint (index built for another codebook)");
    if (idx.n_ != expected_spec.n) throw std::runtime_error("index load: size mismatch");
    idx.sketches_.resize(Eigen::Index(idx.n_), idx.k_dims_);
    for (std::uint64_t i = 0; i < idx.n_; ++i)
        f.read(reinterpret_cast<char*>(idx.sketches_.row(Eigen::Index(i)).data()),
               std::streamsize(idx.k_dims_) * 4);
    if (!f) throw std::runtime_error("index load: truncated file");
    idx.regen_projection(expected_spec.shape);
    return idx;
}

} // namespace wind
