#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lipval/models.hpp"

namespace lipval {
namespace {

using nlohmann::json;

class Reader {
public:
    explicit Reader(std::string origin) : origin_(std::move(origin)) {}

    [[noreturn]] void fail(const std::string& where, const std::string& what) const {
        throw InputError(fmt::format("{}: {}: {}", origin_, where, what));
    }

    const json& field(const json& obj, const std::string& where, const char* key) const {
        if (!obj.is_object()) fail(where, "expected an object");
        auto it = obj.find(key);
        if (it == obj.end()) fail(where, fmt::format("missing field \"{}\"", key));
        return *it;
    }

    double number(const json& v, const std::string& where) const {
        if (!v.is_number()) fail(where, "expected a number");
        return v.get<double>();
    }

    std::size_t count(const json& v, const std::string& where) const {
        if (!v.is_number_integer() || v.get<long long>() < 0)
            fail(where, "expected a non-negative integer");
        return v.get<std::size_t>();
    }

    std::vector<double> vector(const json& v, const std::string& where) const {
        if (!v.is_array()) fail(where, "expected an array of numbers");
        std::vector<double> out;
        out.reserve(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            out.push_back(number(v[i], fmt::format("{}[{}]", where, i)));
        return out;
    }

    // Nested rows; returns row-major data and the shape.
    std::vector<double> matrix(const json& v, const std::string& where, std::size_t& rows,
                               std::size_t& cols) const {
        if (!v.is_array() || v.empty()) fail(where, "expected a nonempty array of rows");
        rows = v.size();
        cols = 0;
        std::vector<double> out;
        for (std::size_t r = 0; r < rows; ++r) {
            const std::string at = fmt::format("{}[{}]", where, r);
            std::vector<double> row = vector(v[r], at);
            if (r == 0) cols = row.size();
            if (row.size() != cols || cols == 0)
                fail(at, fmt::format("row has {} columns, expected {}", row.size(), cols));
            out.insert(out.end(), row.begin(), row.end());
        }
        return out;
    }

    ParameterBox box(const json& doc) const {
        const json& b = field(doc, "bounds", "bounds");
        auto lower = vector(field(b, "bounds", "lower"), "bounds.lower");
        auto upper = vector(field(b, "bounds", "upper"), "bounds.upper");
        try {
            return ParameterBox(std::move(lower), std::move(upper));
        } catch (const InputError& e) {
            fail("bounds", e.what());
        }
    }

private:
    std::string origin_;
};

LoadedModel parse_network(const json& doc, const Reader& rd) {
    const std::size_t n = rd.count(rd.field(doc, "<root>", "n"), "n");
    const std::size_t m = rd.count(rd.field(doc, "<root>", "m"), "m");
    const std::size_t p = rd.count(rd.field(doc, "<root>", "p"), "p");
    const double lipschitz = rd.number(rd.field(doc, "<root>", "lipschitz"), "lipschitz");
    if (!(lipschitz > 0.0)) rd.fail("lipschitz", "must be positive");
    ParameterBox params = rd.box(doc);
    if (params.dim() != n)
        rd.fail("bounds", fmt::format("has {} dimensions, expected n = {}", params.dim(), n));

    const json& layers = rd.field(doc, "<root>", "layers");
    if (!layers.is_array() || layers.empty()) rd.fail("layers", "expected a nonempty array");
    std::vector<DenseLayer> parsed;
    std::size_t width = n + m;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string at = fmt::format("layers[{}]", i);
        DenseLayer l;
        l.weights = rd.matrix(rd.field(layers[i], at, "w"), at + ".w", l.rows, l.cols);
        if (l.cols != width)
            rd.fail(at + ".w", fmt::format("has {} columns, expected {}", l.cols, width));
        l.bias = rd.vector(rd.field(layers[i], at, "b"), at + ".b");
        if (l.bias.size() != l.rows)
            rd.fail(at + ".b", fmt::format("has {} entries, expected {}", l.bias.size(), l.rows));
        const json& act = rd.field(layers[i], at, "act");
        if (!act.is_string()) rd.fail(at + ".act", "expected a string");
        try {
            l.activation = activation_from_string(act.get<std::string>());
        } catch (const InputError& e) {
            rd.fail(at + ".act", e.what());
        }
        width = l.rows;
        parsed.push_back(std::move(l));
    }
    if (width != p) rd.fail("layers", fmt::format("final width {} does not match p = {}", width, p));

    auto net = std::make_shared<const DenseNetwork>(std::move(parsed), n, m);
    LoadedModel out{make_network_model(net, std::move(params), lipschitz), net};
    return out;
}

LoadedModel parse_analytic(const json& doc, const Reader& rd) {
    const json& kind = doc["analytic"];
    if (!kind.is_string()) rd.fail("analytic", "expected a string");
    const std::string name = kind.get<std::string>();
    ModelSpec spec = [&]() -> ModelSpec {
        if (name == "mountain-car-step-pair") return mountain_car::make_model();
        if (name == "identity") {
            const std::size_t m = doc.contains("m") ? rd.count(doc["m"], "m") : 0;
            return make_identity_model(rd.box(doc), m);
        }
        if (name == "affine") {
            ParameterBox params = rd.box(doc);
            std::size_t rows = 0, cols = 0;
            auto a = rd.matrix(rd.field(doc, "<root>", "a"), "a", rows, cols);
            if (cols != params.dim())
                rd.fail("a", fmt::format("has {} columns, expected {}", cols, params.dim()));
            auto b = rd.vector(rd.field(doc, "<root>", "b"), "b");
            if (b.size() != rows)
                rd.fail("b", fmt::format("has {} entries, expected {}", b.size(), rows));
            std::vector<double> bu;
            std::size_t m = 0;
            if (doc.contains("input_matrix")) {
                std::size_t brows = 0;
                bu = rd.matrix(doc["input_matrix"], "input_matrix", brows, m);
                if (brows != rows)
                    rd.fail("input_matrix", fmt::format("has {} rows, expected {}", brows, rows));
            }
            return make_affine_model(std::move(params), std::move(a), std::move(b),
                                     std::move(bu), m);
        }
        rd.fail("analytic", fmt::format("unknown analytic model '{}'", name));
    }();
    if (doc.contains("lipschitz")) {
        spec.lipschitz = rd.number(doc["lipschitz"], "lipschitz");
        if (!(spec.lipschitz > 0.0)) rd.fail("lipschitz", "must be positive");
    }
    return {std::move(spec), nullptr};
}

}  // namespace

LoadedModel parse_model_document(const std::string& text, const std::string& origin) {
    Reader rd(origin);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(fmt::format("{}: parse error: {}", origin, e.what()));
    }
    if (!doc.is_object()) rd.fail("<root>", "expected a JSON object");
    if (doc.contains("analytic")) return parse_analytic(doc, rd);
    return parse_network(doc, rd);
}

ModelSpec parse_model(const std::string& text, const std::string& origin) {
    return parse_model_document(text, origin).spec;
}

ModelSpec load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("{}: cannot open model file", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str(), path.string());
}

}  // namespace lipval
