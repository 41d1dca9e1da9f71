#include "microdepth/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "microdepth/errors.hpp"

namespace microdepth {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr int kModelVersion = 1;

} // namespace

void save_model(const std::string& path, const SavedModel& m) {
    ojson j;
    j["version"] = kModelVersion;
    j["kind"] = m.kind == RegressorKind::Ridge ? "ridge" : "mlp";
    j["layout"] = m.layout;
    std::string bits;
    for (bool b : m.metrics) bits += b ? '1' : '0';
    j["metrics"] = bits;
    j["dim"] = m.dim;
    j["hash"] = m.hash;
    j["standardizer"] = {{"mean", m.standardizer.mean},
                         {"stddev", m.standardizer.stddev},
                         {"flagged", m.standardizer.flagged}};
    if (m.kind == RegressorKind::Ridge) {
        j["ridge"] = {{"weights", m.ridge.weights}, {"bias", m.ridge.bias}, {"lambda", m.ridge.lambda}};
    } else {
        j["mlp"] = {{"layers", m.mlp.layers}, {"weights", m.mlp.weights}, {"biases", m.mlp.biases}};
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(io_error::Kind::IoFailure, path + ": cannot open for writing");
    out << j.dump(2) << "\n";
    if (!out) throw io_error(io_error::Kind::IoFailure, path + ": write failed");
}

SavedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(io_error::Kind::MissingFile, path + ": cannot open model file");
    json j;
    try {
        std::ostringstream ss;
        ss << in.rdbuf();
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw io_error(io_error::Kind::BadHeader, path + ": model parse error: " + e.what());
    }
    try {
        SavedModel m;
        m.version = j.at("version").get<int>();
        if (m.version != kModelVersion)
            throw invalid_dataset(path + ": unsupported model version " +
                                  std::to_string(m.version));
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "ridge")
            m.kind = RegressorKind::Ridge;
        else if (kind == "mlp")
            m.kind = RegressorKind::Mlp;
        else
            throw invalid_dataset(path + ": unknown model kind '" + kind + "'");
        m.layout = j.at("layout").get<std::string>();
        const std::string bits = j.at("metrics").get<std::string>();
        if (bits.size() != kNumMetrics)
            throw invalid_dataset(path + ": bad metrics bitstring");
        for (int i = 0; i < kNumMetrics; ++i) m.metrics[i] = bits[i] == '1';
        m.dim = j.at("dim").get<std::size_t>();
        m.hash = j.at("hash").get<std::uint64_t>();
        const json& s = j.at("standardizer");
        m.standardizer.mean = s.at("mean").get<std::vector<double>>();
        m.standardizer.stddev = s.at("stddev").get<std::vector<double>>();
        m.standardizer.flagged = s.at("flagged").get<std::vector<bool>>();
        if (m.kind == RegressorKind::Ridge) {
            const json& r = j.at("ridge");
            m.ridge.weights = r.at("weights").get<std::vector<double>>();
            m.ridge.bias = r.at("bias").get<double>();
            m.ridge.lambda = r.at("lambda").get<double>();
        } else {
            const json& n = j.at("mlp");
            m.mlp.layers = n.at("layers").get<std::vector<int>>();
            m.mlp.weights = n.at("weights").get<std::vector<std::vector<double>>>();
            m.mlp.biases = n.at("biases").get<std::vector<std::vector<double>>>();
        }
        return m;
    } catch (const json::exception& e) {
        throw invalid_dataset(path + ": malformed model file: " + e.what());
    }
}

std::vector<double> predict(const SavedModel& m, const Matrix& X_raw) {
    if (X_raw.cols != m.dim)
        throw invalid_dataset("predict: feature dimension " + std::to_string(X_raw.cols) +
                              " does not match model dimension " + std::to_string(m.dim));
    const Matrix Z = apply(m.standardizer, X_raw);
    return m.kind == RegressorKind::Ridge ? predict(m.ridge, Z) : predict(m.mlp, Z);
}

} // namespace microdepth
