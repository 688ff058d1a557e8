#include "json_access.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hydroloop/error.hpp"

namespace hydroloop::detail {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

}  // namespace

const nlohmann::json& require(const nlohmann::json& j, const std::string& path, const std::string& key) {
    if (!j.is_object()) throw ValidationError("expected an object at '" + (path.empty() ? "<root>" : path) + "'");
    const auto it = j.find(key);
    if (it == j.end()) throw ValidationError("missing key: " + join(path, key));
    return *it;
}

double require_number(const nlohmann::json& j, const std::string& path, const std::string& key) {
    const auto& v = require(j, path, key);
    if (!v.is_number()) throw ValidationError("key " + join(path, key) + " must be a number");
    return v.get<double>();
}

double number_or(const nlohmann::json& j, const std::string& key, double fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw ValidationError("key " + key + " must be a number");
    return it->get<double>();
}

nlohmann::json parse_json(const std::string& text, const std::string& origin) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        std::ostringstream msg;
        msg << origin << ":" << line << ": JSON parse error: " << e.what();
        throw ValidationError(msg.str());
    }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_json(buf.str(), path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
    if (!out) throw ValidationError("write failed: " + path.string());
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace hydroloop::detail
