#pragma once

// Checkpoint file layout (all integers little-endian):
//
//   "XUBE"                  4 bytes magic
//   u32 version             currently 1
//   u32 header length
//   header                  JSON: approximator spec, optimizer metadata,
//                           parameter count, caller metadata under "meta"
//   payload                 float32 parameters, then optimizer arrays
//   u32 CRC32               of every preceding byte

#include <zlib.h>

#include <bit>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "xube/nn/mlp.hpp"
#include "xube/nn/tabular.hpp"

namespace xube::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'X', 'U', 'B', 'E'};

struct LoadedCheckpoint {
    std::unique_ptr<Approximator> approx;
    nlohmann::json meta;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }

inline std::uint32_t crc32_of(std::string_view bytes) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

class Reader {
  public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        std::uint32_t v = 0;
        std::memcpy(&v, take(4).data(), 4);
        return v;
    }

    std::vector<float> floats(std::size_t n) {
        std::vector<float> v(n);
        auto raw = take(n * sizeof(float));
        if (n) std::memcpy(v.data(), raw.data(), raw.size());
        return v;
    }

    std::string_view take(std::size_t n) {
        if (n > bytes_.size() - pos_) throw CorruptFileError("checkpoint is truncated");
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    [[nodiscard]] bool done() const { return pos_ == bytes_.size(); }

  private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_checkpoint(const Approximator& approx, const nlohmann::json& meta = nlohmann::json::object()) {
    auto header = approx.header();
    header["meta"] = meta;
    const std::string header_text = header.dump();
    std::string out(kCheckpointMagic, 4);
    detail::put_u32(out, kCheckpointVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(header_text.size()));
    out += header_text;
    approx.write_payload(out);
    detail::put_u32(out, detail::crc32_of(out));
    return out;
}

inline LoadedCheckpoint deserialize_checkpoint(std::string_view bytes) {
    if (bytes.size() < 16) throw CorruptFileError("checkpoint is truncated");
    if (bytes.substr(0, 4) != std::string_view(kCheckpointMagic, 4)) throw CorruptFileError("bad checkpoint magic");
    {
        detail::Reader tail(bytes.substr(bytes.size() - 4));
        if (tail.u32() != detail::crc32_of(bytes.substr(0, bytes.size() - 4))) {
            throw CorruptFileError("checkpoint checksum mismatch");
        }
    }
    detail::Reader in(bytes.substr(4, bytes.size() - 8));
    const auto version = in.u32();
    if (version != kCheckpointVersion) {
        throw VersionMismatchError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                                   std::to_string(kCheckpointVersion) + ")");
    }
    const auto header_len = in.u32();
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(in.take(header_len));
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("checkpoint header is not valid JSON: ") + e.what());
    }

    LoadedCheckpoint result;
    result.meta = header.value("meta", nlohmann::json::object());
    const std::string kind = header.value("kind", "");
    try {
        if (kind == "mlp") {
            MlpSpec spec{header.at("layers").get<std::vector<std::size_t>>()};
            spec.validate();
            const auto count = header.at("param_count").get<std::size_t>();
            if (count != param_count(spec)) throw CorruptFileError("checkpoint parameter count does not match spec");
            const auto& opt = header.at("optimizer");
            AdamConfig adam{opt.at("lr").get<double>(), opt.at("beta1").get<double>(), opt.at("beta2").get<double>(),
                            opt.at("eps").get<double>()};
            const Optimizer optimizer = opt.at("name").get<std::string>() == "sgd" ? Optimizer::Sgd : Optimizer::Adam;
            auto mlp = std::make_unique<Mlp>(spec, in.floats(count), optimizer, adam);
            AdamState state;
            state.step = opt.at("step").get<std::uint64_t>();
            if (opt.at("has_moments").get<bool>()) {
                state.m = in.floats(count);
                state.v = in.floats(count);
            }
            mlp->set_adam_state(std::move(state));
            result.approx = std::move(mlp);
        } else if (kind == "table") {
            const auto in_dim = header.at("input_dim").get<std::size_t>();
            const auto out_dim = header.at("output_dim").get<std::size_t>();
            auto table = std::make_unique<TabularApprox>(in_dim, out_dim, header.at("lr").get<double>());
            const auto entries = header.at("entries").get<std::size_t>();
            for (std::size_t e = 0; e < entries; ++e) {
                auto keyvals = in.floats(in_dim);
                table->set_entry(keyvals, in.floats(out_dim));
            }
            result.approx = std::move(table);
        } else {
            throw CorruptFileError("unknown approximator kind '" + kind + "' in checkpoint");
        }
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("checkpoint header is incomplete: ") + e.what());
    }
    if (!in.done()) throw CorruptFileError("checkpoint has trailing bytes");
    return result;
}

// Written to a temporary and renamed into place.
inline void save_checkpoint(const Approximator& approx, const std::filesystem::path& path,
                            const nlohmann::json& meta = nlohmann::json::object()) {
    const std::string bytes = serialize_checkpoint(approx, meta);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write checkpoint " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error("cannot write checkpoint " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read checkpoint " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

}  // namespace xube::nn
