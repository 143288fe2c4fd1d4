#include "nerfocus/field.hpp"

#include <cstring>
#include <fstream>

namespace nerfocus {

namespace {
constexpr char kMagic[8] = {'N', 'F', 'O', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace

void save_checkpoint(const std::string& path, const FieldParams& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os.write(kMagic, sizeof(kMagic));
    const FieldArch& a = params.arch;
    write_pod(os, static_cast<int32_t>(a.num_pos_freqs));
    write_pod(os, static_cast<int32_t>(a.num_dir_freqs));
    write_pod(os, static_cast<int32_t>(a.width));
    write_pod(os, static_cast<int32_t>(a.depth));
    write_pod(os, static_cast<int32_t>(a.skip));
    write_pod(os, params.seed);
    write_pod(os, params.step);
    write_pod(os, static_cast<int64_t>(a.param_count()));
    for (const auto* b : params.blocks()) {
        // Column-major float32 block, declaration order.
        os.write(reinterpret_cast<const char*>(b->data()),
                 static_cast<std::streamsize>(sizeof(float) * b->size()));
    }
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

FieldParams load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    int32_t L, M, width, depth, skip;
    uint64_t seed, step;
    int64_t count;
    read_pod(is, L);
    read_pod(is, M);
    read_pod(is, width);
    read_pod(is, depth);
    read_pod(is, skip);
    read_pod(is, seed);
    read_pod(is, step);
    read_pod(is, count);
    FieldArch a{L, M, width, depth, skip};
    if (!is || L < 1 || M < 1 || width < 1 || depth < 1 || count != a.param_count())
        throw std::runtime_error("load_checkpoint: corrupt header in " + path);
    FieldParams p;
    p.resize(a);
    p.seed = seed;
    p.step = step;
    for (auto* b : p.blocks()) {
        is.read(reinterpret_cast<char*>(b->data()),
                static_cast<std::streamsize>(sizeof(float) * b->size()));
    }
    if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
    return p;
}

}  // namespace nerfocus
