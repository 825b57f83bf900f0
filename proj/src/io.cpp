#include "qcl/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qcl {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.precision(17);
    return out;
}

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failure: " + path);
    return ss.str();
}

json parse_json(const std::string& path) {
    json j = json::parse(read_all(path), nullptr, false);
    if (j.is_discarded()) throw std::invalid_argument("malformed JSON: " + path);
    return j;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("schema violation: " + what);
}

json complex_list(const std::vector<cplx>& v) {
    json arr = json::array();
    for (const cplx& z : v) arr.push_back({z.real(), z.imag()});
    return arr;
}

std::vector<cplx> read_complex_list(const json& arr, std::size_t expect, const std::string& what) {
    require(arr.is_array() && arr.size() == expect, what + " length");
    std::vector<cplx> out;
    out.reserve(expect);
    for (const auto& e : arr) {
        require(e.is_array() && e.size() == 2, what + " entries must be [re, im]");
        out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out = open_out(path);
    out << text;
    out.close();
    if (!out) throw IoError("write failure: " + path);
}

}  // namespace

void save_phase_function(const PhaseFunction& f, const std::string& csv_path, double hbar) {
    const PhaseGrid& g = f.grid();
    std::ofstream out = open_out(csv_path);
    for (int a = 0; a < g.naxes(); ++a) out << "axis" << a << ",";
    out << "re,im\n";
    char buf[64];
    for (std::size_t n = 0; n < g.size(); ++n) {
        PhasePoint x = g.node(n);
        for (double c : x) {
            std::snprintf(buf, sizeof buf, "%.17g,", c);
            out << buf;
        }
        cplx z = f.at(n);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z.real(), z.imag());
        out << buf;
    }
    out.close();
    if (!out) throw IoError("write failure: " + csv_path);

    json side;
    for (int a = 0; a < g.naxes(); ++a) {
        side["mins"].push_back(g.axis(a).min);
        side["maxs"].push_back(g.axis(a).max);
        side["counts"].push_back(g.axis(a).count);
        side["periodic"].push_back(g.axis(a).periodic);
    }
    side["hbar"] = hbar;
    write_text(csv_path + ".json", side.dump(2) + "\n");
}

PhaseFunction load_phase_function(const std::string& csv_path, double* hbar) {
    json side = parse_json(csv_path + ".json");
    require(side.contains("mins") && side.contains("maxs") && side.contains("counts"),
            "phase-function sidecar needs mins/maxs/counts");
    std::vector<Axis> axes;
    std::size_t dims = side["mins"].size();
    require(side["maxs"].size() == dims && side["counts"].size() == dims, "sidecar axis arrays");
    for (std::size_t a = 0; a < dims; ++a) {
        Axis ax;
        ax.min = side["mins"][a].get<double>();
        ax.max = side["maxs"][a].get<double>();
        ax.count = side["counts"][a].get<int>();
        ax.periodic = side.contains("periodic") && side["periodic"][a].get<bool>();
        axes.push_back(ax);
    }
    if (hbar) *hbar = side.value("hbar", 1.0);
    PhaseGrid grid(axes);

    std::istringstream in(read_all(csv_path));
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV: " + csv_path);
    std::vector<cplx> values;
    values.reserve(grid.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> nums;
        while (std::getline(row, cell, ',')) nums.push_back(std::stod(cell));
        require(nums.size() == dims + 2, "CSV row width in " + csv_path);
        values.emplace_back(nums[dims], nums[dims + 1]);
    }
    require(values.size() == grid.size(), "CSV row count in " + csv_path);
    return PhaseFunction(grid, std::move(values));
}

void save_operator(const OperatorMatrix& op, const std::string& path) {
    json j;
    j["dim"] = op.dim;
    j["dq"] = op.dq;
    j["origin"] = op.origin;
    j["hbar"] = op.hbar;
    j["entries"] = complex_list(op.entries);
    write_text(path, j.dump() + "\n");
}

OperatorMatrix load_operator(const std::string& path) {
    json j = parse_json(path);
    require(j.contains("dim") && j.contains("entries"), "operator needs dim and entries");
    int dim = j["dim"].get<int>();
    require(dim > 0 && dim % 2 == 1, "operator dim must be odd and positive");
    OperatorMatrix op(dim, j.value("dq", 1.0), j.value("origin", 0.0), j.value("hbar", 1.0));
    op.entries = read_complex_list(j["entries"], static_cast<std::size_t>(dim) * dim, "entries");
    return op;
}

void save_vanhove(const VanHoveKernel& k, const std::string& path) {
    json j;
    j["omega_max"] = k.grid.omega_max;
    j["count"] = k.grid.count;
    j["charts"] = k.charts;
    j["m_dim"] = k.m_dim;
    j["hbar"] = k.hbar;
    j["singular"] = complex_list(k.singular);
    j["regular"] = complex_list(k.regular);
    write_text(path, j.dump() + "\n");
}

VanHoveKernel load_vanhove(const std::string& path) {
    json j = parse_json(path);
    for (const char* key : {"omega_max", "count", "charts", "m_dim", "singular", "regular"})
        require(j.contains(key), std::string("van Hove kernel needs ") + key);
    OmegaGrid grid{j["omega_max"].get<double>(), j["count"].get<int>()};
    grid.validate();
    VanHoveKernel k(grid, j["charts"].get<int>(), j["m_dim"].get<int>(), j.value("hbar", 1.0));
    k.singular = read_complex_list(j["singular"], k.singular.size(), "singular");
    k.regular = read_complex_list(j["regular"], k.regular.size(), "regular");
    return k;
}

void save_atlas(const Atlas& atlas, const std::string& path) {
    namespace fs = std::filesystem;
    fs::path base(path);
    std::string stem = base.stem().string();
    json j;
    j["epsilon"] = atlas.epsilon;
    j["hbar"] = atlas.hbar;
    j["action_scale"] = atlas.action_scale;
    j["charts"] = json::array();
    for (const Chart& ch : atlas.charts) {
        json cj;
        cj["id"] = ch.id;
        cj["box"] = {{"lo", ch.box.lo}, {"hi", ch.box.hi}};
        cj["epsilon"] = ch.frontier_width;
        cj["constants"] = json::array();
        for (std::size_t k = 0; k < ch.constants.size(); ++k) {
            std::string name =
                stem + "_chart" + std::to_string(ch.id) + "_const" + std::to_string(k) + ".csv";
            save_phase_function(ch.constants[k], (base.parent_path() / name).string(),
                                atlas.hbar);
            cj["constants"].push_back(name);
        }
        j["charts"].push_back(cj);
    }
    write_text(path, j.dump(2) + "\n");
}

Atlas load_atlas(const std::string& path) {
    namespace fs = std::filesystem;
    json j = parse_json(path);
    require(j.contains("charts") && j["charts"].is_array() && !j["charts"].empty(),
            "atlas needs charts");
    std::vector<Box> boxes;
    for (const auto& cj : j["charts"]) {
        require(cj.contains("box"), "chart needs a box");
        Box b;
        b.lo = cj["box"]["lo"].get<std::vector<double>>();
        b.hi = cj["box"]["hi"].get<std::vector<double>>();
        boxes.push_back(b);
    }
    Atlas atlas = build_partition(boxes, j.value("epsilon", 0.0), j.value("hbar", 1.0),
                                  j.value("action_scale", 1.0));
    fs::path base(path);
    for (std::size_t c = 0; c < atlas.charts.size(); ++c) {
        const auto& cj = j["charts"][c];
        require(!cj.contains("id") || cj["id"].get<int>() == atlas.charts[c].id,
                "atlas chart ids must match their order");
        for (const auto& ref : cj.value("constants", json::array()))
            atlas.charts[c].constants.push_back(
                load_phase_function((base.parent_path() / ref.get<std::string>()).string()));
    }
    return atlas;
}

std::uint64_t file_checksum(const std::string& path) {
    std::string bytes = read_all(path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace qcl
