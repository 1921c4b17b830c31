#include "hde/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "hde/errors.hpp"

namespace hde {
namespace {

void put_le64(std::ostream& out, double v)
{
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffU);
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le64(const unsigned char* bytes)
{
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MicroNet& net)
{
    nlohmann::json header;
    header["format"] = "hde-micronet-1";
    header["architecture"] = net.architecture_id();
    header["input_shape"] = net.input_shape();
    header["head_start"] = net.head_start();
    header["parameter_count"] = net.parameter_count();
    nlohmann::json layers = nlohmann::json::array();
    for (const Layer& l : net.layers()) {
        nlohmann::json jl{{"kind", to_string(l.spec.kind)},
                          {"trainable", l.spec.trainable},
                          {"in_shape", l.in_shape},
                          {"out_shape", l.out_shape}};
        if (l.spec.kind == LayerKind::conv2d) {
            jl["out_channels"] = l.spec.out_channels;
            jl["kernel"] = l.spec.kernel;
        }
        if (l.spec.kind == LayerKind::dense) jl["units"] = l.spec.units;
        if (l.spec.kind == LayerKind::dropout) jl["rate"] = l.spec.rate;
        if (l.has_parameters()) {
            jl["weight_shape"] = l.weight.shape();
            jl["bias_shape"] = l.bias.shape();
        }
        layers.push_back(std::move(jl));
    }
    header["layers"] = std::move(layers);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    out << header.dump() << '\n';
    for (const Layer& l : net.layers()) {
        for (double v : l.weight.values()) put_le64(out, v);
        for (double v : l.bias.values()) put_le64(out, v);
    }
    if (!out) throw DataError(path.string() + ": write failed");
}

MicroNet load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string() + ": cannot open checkpoint");
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": missing checkpoint header");

    try {
        const auto header = nlohmann::json::parse(line);
        if (header.at("format") != "hde-micronet-1") throw DataError(path.string() + ": unknown checkpoint format");
        std::vector<LayerSpec> specs;
        for (const auto& jl : header.at("layers")) {
            LayerSpec s;
            s.kind = parse_layer_kind(jl.at("kind").get<std::string>());
            s.trainable = jl.at("trainable").get<bool>();
            if (s.kind == LayerKind::conv2d) {
                s.out_channels = jl.at("out_channels").get<int>();
                s.kernel = jl.at("kernel").get<int>();
            } else if (s.kind == LayerKind::dense) {
                s.units = jl.at("units").get<int>();
            } else if (s.kind == LayerKind::dropout) {
                s.rate = jl.at("rate").get<double>();
            } else if (s.kind == LayerKind::sigmoid_head) {
                s.units = 1;
            }
            specs.push_back(s);
        }
        MicroNet net(header.at("architecture").get<std::string>(), header.at("input_shape").get<Shape3>(),
                     std::move(specs), header.at("head_start").get<std::size_t>());
        if (net.parameter_count() != header.at("parameter_count").get<std::size_t>()) {
            throw DataError(path.string() + ": parameter count does not match architecture");
        }
        std::vector<unsigned char> block(net.parameter_count() * 8);
        in.read(reinterpret_cast<char*>(block.data()), static_cast<std::streamsize>(block.size()));
        if (static_cast<std::size_t>(in.gcount()) != block.size()) {
            throw DataError(path.string() + ": truncated parameter block");
        }
        if (in.peek() != std::char_traits<char>::eof()) {
            throw DataError(path.string() + ": trailing bytes after parameter block");
        }
        const unsigned char* cursor = block.data();
        for (std::size_t i = 0; i < net.layer_count(); ++i) {
            Layer& l = net.layer(i);
            for (double& v : l.weight.values()) v = get_le64(cursor), cursor += 8;
            for (double& v : l.bias.values()) v = get_le64(cursor), cursor += 8;
        }
        net.touch();
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": bad checkpoint header: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(path.string() + ": inconsistent architecture: " + e.what());
    }
}

}  // namespace hde
