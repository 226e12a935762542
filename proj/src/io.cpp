#include "gear/io.hpp"

#include <fstream>
#include <sstream>

#include "gear/error.hpp"
#include "gear/text.hpp"

namespace gear {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed on '" + path.string() + "'");
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed on '" + path.string() + "'");
}

std::string file_checksum(const std::filesystem::path& path) {
    return hex64(fnv1a64(read_file(path)));
}

} // namespace gear
