#include "wind/attacks.hpp"

#include <cmath>
#include <stdexcept>

#include "wind/codebook.hpp"
#include "wind/image_ops.hpp"

namespace wind {

void AttackSpec::validate() const {
    switch (kind) {
        case Kind::Rotate:
            if (!(value > 0.0) || value >= 360.0)
                throw std::invalid_argument("rotate: degrees must be in (0, 360)");
            break;
        case Kind::Jpeg:
            if (value < 1.0 || value > 100.0)
                throw std::invalid_argument("jpeg: quality must be in [1, 100]");
            break;
        case Kind::CropScale:
            if (!(value > 0.0) || value > 1.0)
                throw std::invalid_argument("cropscale: fraction must be in (0, 1]");
            break;
        case Kind::Blur: {
            auto k = std::int64_t(value);
            if (k < 1 || double(k) != value)
                throw std::invalid_argument("blur: kernel must be an integer >= 1");
            break;
        }
        case Kind::GaussNoise:
            if (value < 0.0) throw std::invalid_argument("noise: sigma must be >= 0");
            break;
        case Kind::Brightness:
            if (!(value > 0.0)) throw std::invalid_argument("bright: max factor must be positive");
            break;
        case Kind::Regenerate:
            if (value < 1.0 || double(std::int64_t(value)) != value)
                throw std::invalid_argument("regen: iterations must be an integer >= 1");
            break;
        case Kind::ReconstructionForgery:
            break;
    }
}

std::string AttackSpec::to_string() const {
    auto num = [&](const char* name) {
        std::string v = std::to_string(value);
        v.erase(v.find_last_not_of('0') + 1);
        if (!v.empty() && v.back() == '.') v.pop_back();
        return std::string(name) + ":" + v;
    };
    switch (kind) {
        case Kind::Rotate: return num("rotate");
        case Kind::Jpeg: return num("jpeg");
        case Kind::CropScale: return num("cropscale");
        case Kind::Blur: return num("blur");
        case Kind::GaussNoise: return num("noise");
        case Kind::Brightness: return num("bright");
        case Kind::Regenerate: return num("regen");
        case Kind::ReconstructionForgery: return "forgery";
    }
    return "";
}

AttackSpec AttackSpec::parse(const std::string& text) {
    AttackSpec spec;
    auto colon = text.find(':');
    std::string name = text.substr(0, colon);
    if (name == "forgery") {
        spec.kind = Kind::ReconstructionForgery;
        spec.validate();
        return spec;
    }
    if (colon == std::string::npos) throw std::invalid_argument("attack spec needs name:value");
    spec.value = std::stod(text.substr(colon + 1));
    if (name == "rotate") spec.kind = Kind::Rotate;
    else if (name == "jpeg") spec.kind = Kind::Jpeg;
    else if (name == "cropscale") spec.kind = Kind::CropScale;
    else if (name == "blur") spec.kind = Kind::Blur;
    else if (name == "noise") spec.kind = Kind::GaussNoise;
    else if (name == "bright") spec.kind = Kind::Brightness;
    else if (name == "regen") spec.kind = Kind::Regenerate;
    else throw std::invalid_argument("unknown attack kind: " + name);
    spec.validate();
    return spec;
}

ChannelImage apply_attack(const ChannelImage& img, const AttackSpec& spec, const Channel& channel,
                          std::uint64_t attack_seed) {
    spec.validate();
    if (!tensor_finite(img)) throw std::invalid_argument("attack: non-finite input");
    switch (spec.kind) {
        case AttackSpec::Kind::Rotate:
            return rotate_tensor(img, spec.value);
        case AttackSpec::Kind::Jpeg:
            return dct_quantize_tensor(img, 50.0 / spec.value);
        case AttackSpec::Kind::CropScale: {
            const std::uint32_t h = img.shape.h;
            auto s = std::uint32_t(std::lround(spec.value * h));
            s = std::min(std::max<std::uint32_t>(s, 2), h);
            if (s == h) return img;
            GaussianStream gs(tagged_seed("wind.attack.crop", {attack_seed}));
            auto oy = std::uint32_t(gs.next_below(h - s + 1));
            auto ox = std::uint32_t(gs.next_below(img.shape.w - s + 1));
            return crop_upscale_tensor(img, s, oy, ox);
        }
        case AttackSpec::Kind::Blur:
            return box_blur_tensor(img, std::uint32_t(spec.value));
        case AttackSpec::Kind::GaussNoise: {
            if (spec.value == 0.0) return img;
            LatentTensor eps =
                sample_noise(tagged_seed("wind.attack.noise", {attack_seed}), img.shape);
            ChannelImage out = img;
            for (std::size_t i = 0; i < out.data.size(); ++i)
                out.data[i] += float(spec.value * eps.data[i]);
            return out;
        }
        case AttackSpec::Kind::Brightness: {
            GaussianStream gs(tagged_seed("wind.attack.bright", {attack_seed}));
            double f = gs.next_uniform() * spec.value;
            ChannelImage out = img;
            for (auto& v : out.data) v = float(v * f);
            return out;
        }
        case AttackSpec::Kind::Regenerate:
            return regenerate(img, std::uint64_t(spec.value), channel, attack_seed);
        case AttackSpec::Kind::ReconstructionForgery:
            return reconstruction_forgery(img, channel, attack_seed);
    }
    throw std::logic_error("unreachable attack kind");
}

PatternEstimate steganalysis_estimate(std::span<const ChannelImage> watermarked,
                                      std::span<const ChannelImage> clean) {
    if (watermarked.empty() || clean.empty())
        throw std::invalid_argument("steganalysis: empty image list");
    const TensorShape shape = watermarked.front().shape;
    for (const auto& t : watermarked) {
        if (!(t.shape == shape)) throw std::invalid_argument("steganalysis: shape mismatch");
    }
    for (const auto& t : clean) {
        if (!(t.shape == shape)) throw std::invalid_argument("steganalysis: shape mismatch");
    }
    PatternEstimate est;
    est.data = LatentTensor(shape);
    est.pairs = std::min(watermarked.size(), clean.size());
    std::vector<double> acc(shape.elems(), 0.0);
    for (const auto& t : watermarked)
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += t.data[i];
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] /= double(watermarked.size());
    std::vector<double> accc(shape.elems(), 0.0);
    for (const auto& t : clean)
        for (std::size_t i = 0; i < accc.size(); ++i) accc[i] += t.data[i];
    for (std::size_t i = 0; i < acc.size(); ++i)
        est.data.data[i] = float(acc[i] - accc[i] / double(clean.size()));
    return est;
}

ChannelImage steganalysis_forge(const ChannelImage& target, const PatternEstimate& est) {
    require_same_shape(target, est.data);
    ChannelImage out = target;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += est.data.data[i];
    return out;
}

ChannelImage steganalysis_remove(const ChannelImage& img, const PatternEstimate& est) {
    require_same_shape(img, est.data);
    ChannelImage out = img;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= est.data.data[i];
    return out;
}

ChannelImage regenerate(const ChannelImage& img, std::uint64_t iterations, const Channel& channel,
                        std::uint64_t attack_seed) {
    if (iterations < 1) throw std::invalid_argument("regen: iterations must be >= 1");
    ChannelImage cur = img;
    for (std::uint64_t it = 0; it < iterations; ++it)
        cur = channel.regen_step(cur, attack_seed, it);
    return cur;
}

ChannelImage reconstruction_forgery(const ChannelImage& img, const Channel& channel,
                                    std::uint64_t nonce) {
    LatentTensor stolen = channel.invert_public(img, nonce);
    return channel.generate(stolen, nonce);
}

} // namespace wind
