#include "parkcast/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace parkcast {

namespace {

constexpr char kMagic[8] = {'P', 'K', 'C', 'K', 'P', 'T', '0', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    if (!is) throw Error("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
    for (double d : v) write_u64(os, std::bit_cast<std::uint64_t>(d));
}

void read_doubles(std::istream& is, std::vector<double>& v) {
    for (double& d : v) d = std::bit_cast<double>(read_u64(is));
}

} // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : entries) {
        if (n == name) return &t;
    }
    return nullptr;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("checkpoint: cannot open '" + path + "' for writing");
    os.write(kMagic, sizeof(kMagic));
    const std::string meta = ckpt.meta.dump();
    write_u64(os, meta.size());
    os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    write_u64(os, ckpt.entries.size());
    for (const auto& [name, tensor] : ckpt.entries) {
        write_u64(os, name.size());
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u64(os, tensor.rank());
        for (std::size_t d : tensor.shape()) write_u64(os, d);
        write_doubles(os, tensor.flat());
    }
    if (!os) throw Error("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("checkpoint: cannot open '" + path + "'");
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
        throw Error("checkpoint: '" + path + "' is not a checkpoint file");
    }
    Checkpoint ckpt;
    const std::uint64_t meta_len = read_u64(is);
    std::string meta(meta_len, '\0');
    is.read(meta.data(), static_cast<std::streamsize>(meta_len));
    if (!is) throw Error("checkpoint: truncated metadata in '" + path + "'");
    try {
        ckpt.meta = nlohmann::json::parse(meta);
    } catch (const nlohmann::json::exception& e) {
        throw Error("checkpoint: bad metadata in '" + path + "': " + e.what());
    }
    const std::uint64_t n = read_u64(is);
    ckpt.entries.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t name_len = read_u64(is);
        std::string name(name_len, '\0');
        is.read(name.data(), static_cast<std::streamsize>(name_len));
        if (!is) throw Error("checkpoint: truncated entry name in '" + path + "'");
        const std::uint64_t rank = read_u64(is);
        Shape shape(rank);
        for (std::uint64_t d = 0; d < rank; ++d) shape[d] = read_u64(is);
        Tensor t{shape};
        read_doubles(is, t.flat());
        ckpt.entries.emplace_back(std::move(name), std::move(t));
    }
    return ckpt;
}

void append_params(Checkpoint& ckpt, const ParamStore& params) {
    for (const ParamTensor* p : params.all()) ckpt.entries.emplace_back(p->name, p->value);
}

void restore_params(const Checkpoint& ckpt, ParamStore& params) {
    for (ParamTensor* p : params.all()) {
        const Tensor* t = ckpt.find(p->name);
        if (!t) throw Error("checkpoint: parameter '" + p->name + "' missing");
        if (!t->same_shape(p->value)) {
            throw ShapeError("checkpoint: parameter '" + p->name + "' has shape " +
                             shape_str(t->shape()) + ", expected " + shape_str(p->value.shape()));
        }
        p->value = *t;
    }
}

} // namespace parkcast
