#include "wind/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "wind/sha256.hpp"

namespace wind {

DetectionConfig WindConfig::detection(DetectVariant variant, std::uint32_t n_threads) const {
    DetectionConfig d;
    d.tau_cos = tau_cos;
    d.l2_gate = l2_gate;
    d.variant = variant;
    d.search = search;
    d.stage2_rotation_search = stage2_rotation_search;
    d.stage2_crop_search = stage2_crop_search;
    d.shortlist_top_k = shortlist_top_k;
    d.identify_gate_sigmas = identify_gate_sigmas;
    d.n_threads = n_threads;
    return d;
}

void WindConfig::validate() const {
    codebook.validate();
    rings.validate(codebook.shape);
    channel.validate();
    detection(DetectVariant::Full).validate();
    search.validate(codebook.shape);
    if (rings.n_rings < rings_for_groups(codebook.m))
        throw std::invalid_argument("config: ring count too small for the group count");
}

namespace {

std::vector<std::uint8_t> hex_decode(const std::string& hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("config: odd hex length");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("config: bad hex digit");
    };
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::uint8_t(nib(hex[2 * i]) * 16 + nib(hex[2 * i + 1]));
    return out;
}

std::vector<std::uint8_t> read_salt_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("config: cannot open salt file " + path);
    std::vector<std::uint8_t> salt((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    // allow a trailing newline in hex-encoded salt files
    if (!salt.empty() && (salt.back() == '\n' || salt.back() == '\r')) {
        std::string text(salt.begin(), salt.end());
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
        bool all_hex = !text.empty();
        for (char c : text)
            if (!std::isxdigit(static_cast<unsigned char>(c))) all_hex = false;
        if (all_hex && text.size() % 2 == 0) return hex_decode(text);
    }
    return salt;
}

} // namespace

WindConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(f, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            auto e = s.find_last_not_of(" \t\r");
            s.erase(e == std::string::npos ? 0 : e + 1);
            return s;
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    auto need = [&](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) throw std::runtime_error("config: missing key " + k);
        return it->second;
    };
    auto get = [&](const std::string& k, const std::string& dflt) {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : it->second;
    };
    auto get_u64 = [&](const std::string& k, std::uint64_t dflt) {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : std::stoull(it->second);
    };
    auto get_f = [&](const std::string& k, double dflt) {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : std::stod(it->second);
    };

    if (get_u64("version", 1) != 1) throw std::runtime_error("config: unsupported version");

    WindConfig c;
    c.codebook.n = std::stoull(need("n"));
    c.codebook.m = std::stoull(need("m"));
    {
        std::istringstream ss(need("shape"));
        ss >> c.codebook.shape.c >> c.codebook.shape.h >> c.codebook.shape.w;
        if (!ss) throw std::runtime_error("config: shape needs three integers");
    }
    const char* env_salt = std::getenv("WIND_SALT_FILE");
    if (env_salt && *env_salt) {
        c.salt_file = env_salt;
        c.codebook.salt = read_salt_file(c.salt_file);
    } else if (kv.count("salt_hex")) {
        c.codebook.salt = hex_decode(need("salt_hex"));
    } else {
        c.salt_file = need("salt_file");
        c.codebook.salt = read_salt_file(c.salt_file);
    }

    c.rings.channel = std::uint32_t(get_u64("ring_channel", 0));
    c.rings.r_min = std::uint32_t(get_u64("r_min", 4));
    c.rings.ring_width = std::uint32_t(get_u64("ring_width", 2));
    c.rings.n_rings = std::uint32_t(get_u64("n_rings", rings_for_groups(c.codebook.m)));
    c.rings.amplitude = get_f("amplitude", 1.0);

    c.channel.rho_private_mean = get_f("rho_private_mean", 0.888);
    c.channel.rho_private_spread = get_f("rho_private_spread", 0.05);
    c.channel.rho_public_mean = get_f("rho_public_mean", 0.166);
    c.channel.rho_public_spread = get_f("rho_public_spread", 0.06);
    c.channel.regen_decay = get_f("regen_decay", 0.954);
    c.channel.channel_seed = get_u64("channel_seed", 0);

    c.tau_cos = get_f("tau_cos", 0.5);
    c.l2_gate = get_f("l2_gate", 0.0);
    c.search.rotation_step_deg = get_f("rotation_step_deg", 2.0);
    c.search.window_size = std::uint32_t(get_u64("window_size", 32));
    c.search.window_stride = std::uint32_t(get_u64("window_stride", 8));
    c.search.enable_rotation = get("enable_rotation", "1") != "0";
    c.search.enable_window = get("enable_window", "1") != "0";
    c.stage2_rotation_search = get("stage2_rotation_search", "1") != "0";
    c.stage2_crop_search = get("stage2_crop_search", "1") != "0";
    c.shortlist_top_k = std::uint32_t(get_u64("shortlist_top_k", 32));
    c.identify_gate_sigmas = get_f("identify_gate_sigmas", 6.0);
    c.sketch_k_dims = std::uint32_t(get_u64("sketch_k_dims", 256));
    c.sketch_projection_seed = get_u64("sketch_projection_seed", 9157);

    c.validate();
    return c;
}

void save_config(const WindConfig& cfg, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("config: cannot write " + path);
    f << std::setprecision(17);
    f << "version = 1\n";
    f << "n = " << cfg.codebook.n << "\n";
    f << "m = " << cfg.codebook.m << "\n";
    f << "shape = " << cfg.codebook.shape.c << " " << cfg.codebook.shape.h << " "
      << cfg.codebook.shape.w << "\n";
    if (!cfg.salt_file.empty())
        f << "salt_file = " << cfg.salt_file << "\n";
    else
        f << "salt_hex = " << hex_encode(cfg.codebook.salt) << "\n";
    f << "ring_channel = " << cfg.rings.channel << "\n";
    f << "r_min = " << cfg.rings.r_min << "\n";
    f << "ring_width = " << cfg.rings.ring_width << "\n";
    f << "n_rings = " << cfg.rings.n_rings << "\n";
    f << "amplitude = " << cfg.rings.amplitude << "\n";
    f << "rho_private_mean = " << cfg.channel.rho_private_mean << "\n";
    f << "rho_private_spread = " << cfg.channel.rho_private_spread << "\n";
    f << "rho_public_mean = " << cfg.channel.rho_public_mean << "\n";
    f << "rho_public_spread = " << cfg.channel.rho_public_spread << "\n";
    f << "regen_decay = " << cfg.channel.regen_decay << "\n";
    f << "channel_seed = " << cfg.channel.channel_seed << "\n";
    f << "tau_cos = " << cfg.tau_cos << "\n";
    f << "l2_gate = " << cfg.l2_gate << "\n";
    f << "rotation_step_deg = " << cfg.search.rotation_step_deg << "\n";
    f << "window_size = " << cfg.search.window_size << "\n";
    f << "window_stride = " << cfg.search.window_stride << "\n";
    f << "enable_rotation = " << (cfg.search.enable_rotation ? 1 : 0) << "\n";
    f << "enable_window = " << (cfg.search.enable_window ? 1 : 0) << "\n";
    f << "stage2_rotation_search = " << (cfg.stage2_rotation_search ? 1 : 0) << "\n";
    f << "stage2_crop_search = " << (cfg.stage2_crop_search ? 1 : 0) << "\n";
    f << "shortlist_top_k = " << cfg.shortlist_top_k << "\n";
    f << "identify_gate_sigmas = " << cfg.identify_gate_sigmas << "\n";
    f << "sketch_k_dims = " << cfg.sketch_k_dims << "\n";
    f << "sketch_projection_seed = " << cfg.sketch_projection_seed << "\n";
    if (!f) throw std::runtime_error("config: write failed");
}

WindConfig default_config(std::uint64_t n, std::uint64_t m, std::uint64_t salt_seed) {
    WindConfig c;
    c.codebook.n = n;
    c.codebook.m = m;
    c.codebook.shape = {4, 64, 64};
    c.codebook.salt.resize(kMinSaltLen);
    ChaCha20Stream ks(tagged_seed("wind.salt", {salt_seed}));
    ks.fill(c.codebook.salt.data(), c.codebook.salt.size());
    c.rings = RingGeometry::for_groups(m);
    c.validate();
    return c;
}

} // namespace wind
