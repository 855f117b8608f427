#include "qgdetect/bundle.hpp"
#include "qgdetect/errors.hpp"
#include "qgdetect/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace qgd {

using nlohmann::json;

namespace {

json grid_to_json(const QuantizationGrid& g) {
    return json{{"kind", to_string(g.kind)}, {"m", g.m}, {"edges", g.edges}};
}

QuantizationGrid grid_from_json(const json& j) {
    QuantizationGrid g;
    g.kind = grid_kind_from_string(j.at("kind").get<std::string>());
    g.m = j.at("m").get<int>();
    g.edges = j.at("edges").get<std::vector<double>>();
    if (g.m < 2 || g.edges.size() != static_cast<std::size_t>(g.m) + 1 ||
        g.edges.front() != 0.0 || g.edges.back() != 1.0 ||
        !std::is_sorted(g.edges.begin(), g.edges.end()))
        throw parse_error("bundle: malformed quantization grid");
    return g;
}

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m;
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.data = j.at("data").get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols)
        throw parse_error("bundle: matrix shape header disagrees with payload");
    return m;
}

json config_to_json(const PreprocessConfig& c) {
    return json{{"look_back", c.look_back},
                {"look_ahead", c.look_ahead},
                {"in_grid", c.in_grid},
                {"out_grid", c.out_grid},
                {"in_algorithm", to_string(c.in_algorithm)},
                {"out_algorithm", to_string(c.out_algorithm)},
                {"samples_percentage", c.samples_percentage},
                {"target_channel", c.target_channel},
                {"seed", c.seed},
                {"decimation", c.decimation}};
}

PreprocessConfig config_from_json(const json& j) {
    PreprocessConfig c;
    c.look_back = j.at("look_back").get<int>();
    c.look_ahead = j.at("look_ahead").get<int>();
    c.in_grid = j.at("in_grid").get<int>();
    c.out_grid = j.at("out_grid").get<int>();
    c.in_algorithm = grid_kind_from_string(j.at("in_algorithm").get<std::string>());
    c.out_algorithm = grid_kind_from_string(j.at("out_algorithm").get<std::string>());
    c.samples_percentage = j.at("samples_percentage").get<double>();
    c.target_channel = j.at("target_channel").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.decimation = j.at("decimation").get<int>();
    c.validate();
    return c;
}

} // namespace

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
    json layers = json::array();
    for (const GruCell& c : bundle.model.layers) {
        layers.push_back(json{{"input_size", c.input_size},
                              {"hidden_size", c.hidden_size},
                              {"W_zx", matrix_to_json(c.W_zx)},
                              {"W_zh", matrix_to_json(c.W_zh)},
                              {"W_rx", matrix_to_json(c.W_rx)},
                              {"W_rh", matrix_to_json(c.W_rh)},
                              {"W_hx", matrix_to_json(c.W_hx)},
                              {"W_hh", matrix_to_json(c.W_hh)},
                              {"b_z", c.b_z},
                              {"b_r", c.b_r},
                              {"b_h", c.b_h}});
    }

    json in_grids = json::array();
    for (const QuantizationGrid& g : bundle.grids.input) in_grids.push_back(grid_to_json(g));
    json bounds = json::array();
    for (const Bounds& b : bundle.grids.norm_bounds)
        bounds.push_back(json{{"min", b.min}, {"max", b.max}});

    json j{{"format", "qgdetect-bundle"},
           {"version", bundle_format_version},
           {"preprocess", config_to_json(bundle.config)},
           {"grids", json{{"input", in_grids},
                          {"output", grid_to_json(bundle.grids.output)},
                          {"norm_bounds", bounds}}},
           {"model", json{{"input_channels", bundle.model.input_channels},
                          {"look_back", bundle.model.look_back},
                          {"in_grid", bundle.model.in_grid},
                          {"out_grid", bundle.model.out_grid},
                          {"layers", layers},
                          {"dense",
                           json{{"w", matrix_to_json(bundle.model.dense_w)},
                                {"b", bundle.model.dense_b}}}}}};

    atomic_write_text(path, j.dump());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error("bundle " + path.string() + ": truncated or malformed (" +
                          e.what() + ")");
    }

    try {
        if (j.at("format").get<std::string>() != "qgdetect-bundle")
            throw parse_error("bundle " + path.string() + ": not a model bundle");
        const int version = j.at("version").get<int>();
        if (version != bundle_format_version)
            throw parse_error("bundle " + path.string() + ": unsupported version " +
                              std::to_string(version));

        ModelBundle b;
        b.config = config_from_json(j.at("preprocess"));

        const json& grids = j.at("grids");
        for (const json& g : grids.at("input")) b.grids.input.push_back(grid_from_json(g));
        b.grids.output = grid_from_json(grids.at("output"));
        for (const json& bb : grids.at("norm_bounds"))
            b.grids.norm_bounds.push_back(
                Bounds{bb.at("min").get<double>(), bb.at("max").get<double>()});

        const json& m = j.at("model");
        b.model.input_channels = m.at("input_channels").get<std::size_t>();
        b.model.look_back = m.at("look_back").get<std::size_t>();
        b.model.in_grid = m.at("in_grid").get<int>();
        b.model.out_grid = m.at("out_grid").get<int>();
        for (const json& lj : m.at("layers")) {
            GruCell c;
            c.input_size = lj.at("input_size").get<std::size_t>();
            c.hidden_size = lj.at("hidden_size").get<std::size_t>();
            c.W_zx = matrix_from_json(lj.at("W_zx"));
            c.W_zh = matrix_from_json(lj.at("W_zh"));
            c.W_rx = matrix_from_json(lj.at("W_rx"));
            c.W_rh = matrix_from_json(lj.at("W_rh"));
            c.W_hx = matrix_from_json(lj.at("W_hx"));
            c.W_hh = matrix_from_json(lj.at("W_hh"));
            c.b_z = lj.at("b_z").get<std::vector<double>>();
            c.b_r = lj.at("b_r").get<std::vector<double>>();
            c.b_h = lj.at("b_h").get<std::vector<double>>();
            if (c.W_zx.rows != c.hidden_size || c.W_zx.cols != c.input_size ||
                c.W_zh.rows != c.hidden_size || c.W_zh.cols != c.hidden_size ||
                c.b_z.size() != c.hidden_size || c.b_r.size() != c.hidden_size ||
                c.b_h.size() != c.hidden_size)
                throw parse_error("bundle " + path.string() + ": layer shape mismatch");
            b.model.layers.push_back(std::move(c));
        }
        b.model.dense_w = matrix_from_json(m.at("dense").at("w"));
        b.model.dense_b = m.at("dense").at("b").get<std::vector<double>>();
        if (b.model.layers.empty())
            throw parse_error("bundle " + path.string() + ": no layers");
        if (b.grids.input.size() != b.model.input_channels ||
            b.grids.norm_bounds.size() != b.model.input_channels)
            throw parse_error("bundle " + path.string() + ": grid/channel count mismatch");
        return b;
    } catch (const json::exception& e) {
        throw parse_error("bundle " + path.string() + ": missing or mistyped field (" +
                          e.what() + ")");
    }
}

void check_config_compatible(const PreprocessConfig& stored,
                             const PreprocessConfig& requested) {
    std::ostringstream bad;
    auto diff = [&](const char* key, auto a, auto b) {
        if (a != b) {
            if (bad.tellp() > 0) bad << ", ";
            bad << key;
        }
    };
    diff("look_back", stored.look_back, requested.look_back);
    diff("look_ahead", stored.look_ahead, requested.look_ahead);
    diff("in_grid", stored.in_grid, requested.in_grid);
    diff("out_grid", stored.out_grid, requested.out_grid);
    diff("in_algorithm", stored.in_algorithm, requested.in_algorithm);
    diff("out_algorithm", stored.out_algorithm, requested.out_algorithm);
    diff("target_channel", stored.target_channel, requested.target_channel);
    diff("decimation", stored.decimation, requested.decimation);
    if (bad.tellp() > 0)
        throw config_mismatch_error("bundle was built under a different config: " +
                                    bad.str());
}

} // namespace qgd
