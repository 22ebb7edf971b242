#include "fedtrial/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <nlohmann/json.hpp>

#include "fedtrial/errors.hpp"
#include "fedtrial/rng.hpp"

namespace fedtrial::nn {

void ArchitectureSpec::validate() const {
    if (input_dim < 1)
        throw ConfigError("architecture: input_dim must be >= 1, got " + std::to_string(input_dim));
    switch (kind) {
    case ArchKind::FCN:
        if (hidden_dims.empty())
            throw ConfigError("architecture: FCN needs at least one hidden layer");
        for (int h : hidden_dims)
            if (h < 1)
                throw ConfigError("architecture: hidden layer width must be >= 1, got " + std::to_string(h));
        if (embedding_dim != 0)
            throw ConfigError("architecture: embedding_dim is only meaningful for GRU");
        break;
    case ArchKind::GRU:
        if (hidden_dims.size() != 1)
            throw ConfigError("architecture: GRU takes exactly one hidden width, got " +
                              std::to_string(hidden_dims.size()));
        if (hidden_dims[0] < 1)
            throw ConfigError("architecture: hidden width must be >= 1, got " + std::to_string(hidden_dims[0]));
        if (embedding_dim < 1)
            throw ConfigError("architecture: GRU needs embedding_dim >= 1, got " + std::to_string(embedding_dim));
        break;
    }
}

std::vector<ParamSegment> parameter_layout(const ArchitectureSpec& spec) {
    spec.validate();
    std::vector<ParamSegment> segs;
    std::size_t off = 0;
    auto push = [&](std::string name, std::size_t rows, std::size_t cols, bool bias) {
        segs.push_back({std::move(name), off, rows, cols, bias});
        off += rows * cols;
    };
    if (spec.kind == ArchKind::FCN) {
        std::vector<int> dims;
        dims.push_back(spec.input_dim);
        dims.insert(dims.end(), spec.hidden_dims.begin(), spec.hidden_dims.end());
        dims.push_back(1);
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            const bool last = (l + 2 == dims.size());
            const std::string tag = last ? "_out" : std::to_string(l + 1);
            push("W" + tag, static_cast<std::size_t>(dims[l]), static_cast<std::size_t>(dims[l + 1]), false);
            push("b" + tag, 1, static_cast<std::size_t>(dims[l + 1]), true);
        }
    } else {
        const auto V = static_cast<std::size_t>(spec.input_dim);
        const auto E = static_cast<std::size_t>(spec.embedding_dim);
        const auto H = static_cast<std::size_t>(spec.hidden_dims[0]);
        push("embed", V, E, false);
        push("W_z", E, H, false);
        push("U_z", H, H, false);
        push("W_r", E, H, false);
        push("U_r", H, H, false);
        push("W_c", E, H, false);
        push("U_c", H, H, false);
        push("b_z", 1, H, true);
        push("b_r", 1, H, true);
        push("b_c", 1, H, true);
        push("W_out", H, 1, false);
        push("b_out", 1, 1, true);
    }
    return segs;
}

std::size_t parameter_count(const ArchitectureSpec& spec) {
    std::size_t n = 0;
    for (const auto& s : parameter_layout(spec))
        n += s.rows * s.cols;
    return n;
}

ModelParameters init_parameters(const ArchitectureSpec& spec) {
    const auto segs = parameter_layout(spec);
    ModelParameters params;
    params.spec = spec;
    params.values.assign(parameter_count(spec), 0.0);
    Rng rng(derive_seed({spec.seed, seed_tag::kInit}));
    for (const auto& s : segs) {
        if (s.bias)
            continue;  // biases stay zero
        const double bound = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
        for (std::size_t i = 0; i < s.rows * s.cols; ++i)
            params.values[s.offset + i] = rng.uniform(-bound, bound);
    }
    return params;
}

namespace {

nlohmann::json spec_to_json(const ArchitectureSpec& spec) {
    return nlohmann::json{{"kind", spec.kind == ArchKind::FCN ? "FCN" : "GRU"},
                          {"input_dim", spec.input_dim},
                          {"hidden_dims", spec.hidden_dims},
                          {"embedding_dim", spec.embedding_dim},
                          {"seed", spec.seed}};
}

ArchitectureSpec spec_from_json(const nlohmann::json& j) {
    ArchitectureSpec spec;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "FCN")
        spec.kind = ArchKind::FCN;
    else if (kind == "GRU")
        spec.kind = ArchKind::GRU;
    else
        throw IoError("parameter file: unknown architecture kind '" + kind + "'");
    spec.input_dim = j.at("input_dim").get<int>();
    spec.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
    spec.embedding_dim = j.at("embedding_dim").get<int>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
    if (pos + 4 > in.size())
        throw IoError("parameter file: truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 4;
    return v;
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
    if (pos + 8 > in.size())
        throw IoError("parameter file: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 8;
    return v;
}

constexpr char kMagic[8] = {'F', 'T', 'P', 'A', 'R', 'A', 'M', 'S'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::string serialize_parameters(const ModelParameters& params) {
    if (params.values.size() != parameter_count(params.spec))
        throw ShapeError("serialize: value count " + std::to_string(params.values.size()) +
                         " does not match architecture");
    const std::string spec_json = spec_to_json(params.spec).dump();
    std::string out;
    out.reserve(8 + 4 + 4 + 8 + spec_json.size() + 8 + params.values.size() * 8);
    out.append(kMagic, sizeof(kMagic));
    put_u32(out, kVersion);
    put_u32(out, 0);  // reserved
    put_u64(out, spec_json.size());
    out += spec_json;
    put_u64(out, params.values.size());
    for (double v : params.values)
        put_u64(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

ModelParameters deserialize_parameters(const std::string& blob) {
    if (blob.size() < sizeof(kMagic) || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0)
        throw IoError("parameter file: bad magic");
    std::size_t pos = sizeof(kMagic);
    const std::uint32_t version = get_u32(blob, pos);
    if (version != kVersion)
        throw IoError("parameter file: unsupported version " + std::to_string(version));
    get_u32(blob, pos);  // reserved
    const std::uint64_t json_len = get_u64(blob, pos);
    if (pos + json_len > blob.size())
        throw IoError("parameter file: truncated");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(blob.substr(pos, json_len));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("parameter file: bad header json: ") + e.what());
    }
    pos += json_len;
    ModelParameters params;
    try {
        params.spec = spec_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("parameter file: bad header json: ") + e.what());
    }
    const std::uint64_t count = get_u64(blob, pos);
    if (count != parameter_count(params.spec))
        throw IoError("parameter file: value count does not match architecture");
    if (pos + count * 8 > blob.size())
        throw IoError("parameter file: truncated");
    params.values.resize(count);
    for (std::uint64_t i = 0; i < count; ++i)
        params.values[i] = std::bit_cast<double>(get_u64(blob, pos));
    for (std::size_t i = 0; i < params.values.size(); ++i)
        if (!std::isfinite(params.values[i]))
            throw NumericError("parameter file: non-finite value at index " + std::to_string(i));
    return params;
}

}  // namespace fedtrial::nn
