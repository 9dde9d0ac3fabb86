#include "apnn/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "apnn/rng.hpp"
#include "json.hpp"

namespace apnn {

void NetworkSpec::validate() const {
    if (layer_widths.size() < 2) throw ConfigError("NetworkSpec: need at least [m0, mL]");
    for (int w : layer_widths)
        if (w <= 0) throw ConfigError("NetworkSpec: widths must be positive");
    if (layer_widths.back() != 1) throw ConfigError("NetworkSpec: output width must be 1");
}

std::int64_t NetworkSpec::parameter_count() const {
    std::int64_t n = 0;
    for (size_t l = 0; l + 1 < layer_widths.size(); ++l)
        n += static_cast<std::int64_t>(layer_widths[l + 1]) * (layer_widths[l] + 1);
    return n;
}

std::string NetworkSpec::to_string() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < layer_widths.size(); ++i)
        os << layer_widths[i] << (i + 1 < layer_widths.size() ? ", " : "");
    os << "]";
    return os.str();
}

ParameterSet::ParameterSet(const NetworkSpec& spec) : spec_(spec) {
    spec_.validate();
    std::int64_t off = 0;
    const int L = spec_.depth();
    w_offset_.resize(L);
    b_offset_.resize(L);
    for (int l = 0; l < L; ++l) {
        const std::int64_t m_in = spec_.layer_widths[l];
        const std::int64_t m_out = spec_.layer_widths[l + 1];
        w_offset_[l] = off;
        b_offset_[l] = off + m_out * m_in;
        off += m_out * (m_in + 1);
    }
    data_.assign(off, 0.0);
}

ParameterSet init_parameters(const NetworkSpec& spec, std::uint64_t seed) {
    ParameterSet params(spec);
    Philox root(seed);
    for (int l = 0; l < spec.depth(); ++l) {
        Philox stream = root.split(static_cast<std::uint64_t>(l));
        const int m_in = spec.layer_widths[l];
        const int m_out = spec.layer_widths[l + 1];
        const double bound = std::sqrt(6.0 / (m_in + m_out));
        double* w = params.weights(l);
        for (int i = 0; i < m_out * m_in; ++i) w[i] = stream.uniform(-bound, bound);
        // biases stay zero
    }
    return params;
}

double mlp_forward(const ParameterSet& params, std::span<const double> input) {
    return mlp_forward_generic<double>(params.spec(), params.flat(), input);
}

double f_net(const ParameterSet& params, double t, double x, double v) {
    const double raw = mlp_forward(params, std::array<double, 3>{t, x, v});
    return std::exp(-raw);
}

double rho_net(const ParameterSet& params, double t, double x) {
    const double raw = mlp_forward(params, std::array<double, 2>{t, x});
    return std::exp(-raw);
}

std::vector<double> g_net_nodes(const ParameterSet& params, double t, double x,
                                const QuadratureRule& rule) {
    std::vector<double> raw(rule.size());
    for (int i = 0; i < rule.size(); ++i)
        raw[i] = mlp_forward(params, std::array<double, 3>{t, x, rule.nodes[i]});
    const double mean = velocity_average<double>(raw, rule);
    for (double& r : raw) r -= mean;
    return raw;
}

double g_net(const ParameterSet& params, double t, double x, double v, const QuadratureRule& rule) {
    std::vector<double> raw(rule.size());
    for (int i = 0; i < rule.size(); ++i)
        raw[i] = mlp_forward(params, std::array<double, 3>{t, x, rule.nodes[i]});
    const double mean = velocity_average<double>(raw, rule);
    return mlp_forward(params, std::array<double, 3>{t, x, v}) - mean;
}

namespace {
constexpr int kCheckpointLayout = 1;
}

void save_checkpoint(const std::string& path_prefix, const ParameterSet& params,
                     std::uint64_t seed) {
    std::ofstream bin(path_prefix + ".bin", std::ios::binary);
    if (!bin) throw ConfigError("save_checkpoint: cannot open " + path_prefix + ".bin");
    for (double d : params.flat()) {
        std::uint64_t u;
        std::memcpy(&u, &d, sizeof(u));
        unsigned char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(u >> (8 * i));
        bin.write(reinterpret_cast<const char*>(bytes), 8);
    }
    nlohmann::json meta = {{"layout_version", kCheckpointLayout},
                           {"layer_widths", params.spec().layer_widths},
                           {"activation", "tanh"},
                           {"seed", seed},
                           {"parameter_count", params.size()}};
    std::ofstream js(path_prefix + ".json");
    js << meta.dump(2) << "\n";
}

ParameterSet load_checkpoint(const std::string& path_prefix) {
    std::ifstream js(path_prefix + ".json");
    if (!js) throw ConfigError("load_checkpoint: cannot open " + path_prefix + ".json");
    nlohmann::json meta = nlohmann::json::parse(js);
    if (meta.at("layout_version").get<int>() != kCheckpointLayout)
        throw ConfigError("load_checkpoint: unsupported layout version");
    NetworkSpec spec(meta.at("layer_widths").get<std::vector<int>>());
    ParameterSet params(spec);
    std::ifstream bin(path_prefix + ".bin", std::ios::binary);
    if (!bin) throw ConfigError("load_checkpoint: cannot open " + path_prefix + ".bin");
    for (double& d : params.flat()) {
        unsigned char bytes[8];
        bin.read(reinterpret_cast<char*>(bytes), 8);
        if (!bin) throw ConfigError("load_checkpoint: truncated binary payload");
        std::uint64_t u = 0;
        for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
        std::memcpy(&d, &u, sizeof(d));
    }
    return params;
}

}  // namespace apnn
