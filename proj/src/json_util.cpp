#include "json_util.hpp"

#include <fstream>
#include <sstream>

namespace synthact::jsonutil {

json load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

void write_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write file: " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace synthact::jsonutil
