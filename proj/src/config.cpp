#include "sgsf/config.hpp"

#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "sgsf/error.hpp"

namespace sgsf {
namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const double d = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return d;
    } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "': not a number: '" + val + "'");
    }
}

int parse_int(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const long v = std::stol(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "': not an integer: '" + val + "'");
    }
}

std::string format_double(double d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
}

} // namespace

std::string to_string(SelfTask t) {
    return t == SelfTask::reconstruction ? "reconstruction" : "denoising";
}

SelfTask self_task_from_string(const std::string& s) {
    if (s == "reconstruction") return SelfTask::reconstruction;
    if (s == "denoising") return SelfTask::denoising;
    throw ValidationError("config key 'self_task': expected 'reconstruction' or 'denoising', got '" +
                          s + "'");
}

void RunConfig::validate() const {
    auto fail = [](const std::string& m) { throw ValidationError("config: " + m); };
    if (image_side < 1) fail("image_side must be >= 1");
    if (channels != 1 && channels != 3) fail("channels must be 1 or 3");
    if (a < 0.0) fail("a must be >= 0");
    if (b < 0.0) fail("b must be >= 0");
    if (a + b > 1.0) fail("a + b must be <= 1");
    if (alpha_lo < 0.0 || alpha_hi > 1.0 || alpha_lo > alpha_hi)
        fail("alpha range must satisfy 0 <= alpha_lo <= alpha_hi <= 1");
    if (forged_ratio <= 0.0) fail("forged_ratio must be > 0");
    if (n_contrast < 1) fail("n_contrast must be >= 1");
    if (lambda < 0.0) fail("lambda must be >= 0");
    if (tau < 0.0) fail("tau must be >= 0");
    if (lr <= 0.0) fail("lr must be > 0");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (total_epochs < 1) fail("total_epochs must be >= 1");
    for (double m : decay_milestones)
        if (m < 0.0 || m > 1.0) fail("decay_milestones entries must lie in [0,1]");
    if (smoothing_window < 1 || smoothing_window % 2 == 0)
        fail("smoothing_window must be odd and >= 1");
    if (ssim_window < 1 || ssim_window % 2 == 0) fail("ssim_window must be odd and >= 1");
    if (base_channels < 4) fail("base_channels must be >= 4");
    if (checkpoint_every < 0) fail("checkpoint_every must be >= 0");
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ValidationError("config line " + std::to_string(lineno) + ": empty key or value");
        if (!seen.insert(key).second)
            throw ValidationError("config: duplicate key '" + key + "'");

        if (key == "image_side") cfg.image_side = parse_int(key, val);
        else if (key == "channels") cfg.channels = parse_int(key, val);
        else if (key == "a") cfg.a = parse_double(key, val);
        else if (key == "b") cfg.b = parse_double(key, val);
        else if (key == "alpha_lo") cfg.alpha_lo = parse_double(key, val);
        else if (key == "alpha_hi") cfg.alpha_hi = parse_double(key, val);
        else if (key == "forged_ratio") cfg.forged_ratio = parse_double(key, val);
        else if (key == "n_contrast") cfg.n_contrast = parse_int(key, val);
        else if (key == "lambda") cfg.lambda = parse_double(key, val);
        else if (key == "tau") cfg.tau = parse_double(key, val);
        else if (key == "lr") cfg.lr = parse_double(key, val);
        else if (key == "batch_size") cfg.batch_size = parse_int(key, val);
        else if (key == "total_epochs") cfg.total_epochs = parse_int(key, val);
        else if (key == "decay_milestones") {
            cfg.decay_milestones.clear();
            std::istringstream ms(val);
            std::string tok;
            while (std::getline(ms, tok, ','))
                cfg.decay_milestones.push_back(parse_double(key, trim(tok)));
        } else if (key == "seed") {
            try {
                cfg.seed = std::stoull(val);
            } catch (const std::exception&) {
                throw ValidationError("config key 'seed': not an unsigned integer: '" + val + "'");
            }
        } else if (key == "smoothing_window") cfg.smoothing_window = parse_int(key, val);
        else if (key == "ssim_window") cfg.ssim_window = parse_int(key, val);
        else if (key == "self_task") cfg.self_task = self_task_from_string(val);
        else if (key == "base_channels") cfg.base_channels = parse_int(key, val);
        else if (key == "checkpoint_every") cfg.checkpoint_every = parse_int(key, val);
        else throw ValidationError("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeFailure("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "image_side = " << cfg.image_side << "\n";
    out << "channels = " << cfg.channels << "\n";
    out << "a = " << format_double(cfg.a) << "\n";
    out << "b = " << format_double(cfg.b) << "\n";
    out << "alpha_lo = " << format_double(cfg.alpha_lo) << "\n";
    out << "alpha_hi = " << format_double(cfg.alpha_hi) << "\n";
    out << "forged_ratio = " << format_double(cfg.forged_ratio) << "\n";
    out << "n_contrast = " << cfg.n_contrast << "\n";
    out << "lambda = " << format_double(cfg.lambda) << "\n";
    out << "tau = " << format_double(cfg.tau) << "\n";
    out << "lr = " << format_double(cfg.lr) << "\n";
    out << "batch_size = " << cfg.batch_size << "\n";
    out << "total_epochs = " << cfg.total_epochs << "\n";
    out << "decay_milestones = ";
    for (size_t i = 0; i < cfg.decay_milestones.size(); ++i) {
        if (i) out << ",";
        out << format_double(cfg.decay_milestones[i]);
    }
    out << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "smoothing_window = " << cfg.smoothing_window << "\n";
    out << "ssim_window = " << cfg.ssim_window << "\n";
    out << "self_task = " << to_string(cfg.self_task) << "\n";
    out << "base_channels = " << cfg.base_channels << "\n";
    out << "checkpoint_every = " << cfg.checkpoint_every << "\n";
    return out.str();
}

std::string config_fingerprint(const RunConfig& cfg) {
    const std::string s = serialize_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

} // namespace sgsf
