#include "phifem/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace phifem {

namespace {

// Exact endpoint coordinates so boundary vertices sit on the rectangle edges.
double grid_coord(int i, int n, double extent) {
    if (i == 0) return 0.0;
    if (i == n) return extent;
    return extent * static_cast<double>(i) / static_cast<double>(n);
}

struct FileCloser {
    void operator()(std::FILE *f) const {
        if (f != nullptr) std::fclose(f);
    }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

FileHandle open_for_write(const std::string &path) {
    FileHandle f(std::fopen(path.c_str(), "wb"));
    if (!f) throw Error("cannot open '" + path + "' for writing");
    return f;
}

} // namespace

MeshPtr make_rect_mesh(int nx, int ny, double width, double height) {
    if (nx < 2 || ny < 2)
        throw InvalidDimensions("mesh requires at least 2 cells per direction, got " +
                                std::to_string(nx) + " x " + std::to_string(ny));
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) ||
        !std::isfinite(height))
        throw InvalidDimensions("mesh extents must be positive and finite");

    auto mesh = std::make_shared<Mesh>();
    mesh->nx_ = nx;
    mesh->ny_ = ny;
    mesh->width_ = width;
    mesh->height_ = height;

    const std::size_t nvx = static_cast<std::size_t>(nx) + 1;
    const std::size_t nvy = static_cast<std::size_t>(ny) + 1;
    mesh->vertices_.reserve(nvx * nvy);
    mesh->boundary_.reserve(nvx * nvy);
    for (std::size_t j = 0; j < nvy; ++j) {
        for (std::size_t i = 0; i < nvx; ++i) {
            mesh->vertices_.push_back({grid_coord(static_cast<int>(i), nx, width),
                                       grid_coord(static_cast<int>(j), ny, height)});
            const bool edge = i == 0 || i == static_cast<std::size_t>(nx) ||
                              j == 0 || j == static_cast<std::size_t>(ny);
            mesh->boundary_.push_back(edge ? 1 : 0);
            if (edge) ++mesh->n_boundary_;
        }
    }

    auto vid = [nvx](std::size_t i, std::size_t j) { return j * nvx + i; };
    mesh->triangles_.reserve(2 * static_cast<std::size_t>(nx) *
                             static_cast<std::size_t>(ny));
    for (std::size_t j = 0; j < static_cast<std::size_t>(ny); ++j) {
        for (std::size_t i = 0; i < static_cast<std::size_t>(nx); ++i) {
            const std::size_t a = vid(i, j);
            const std::size_t b = vid(i + 1, j);
            const std::size_t c = vid(i + 1, j + 1);
            const std::size_t d = vid(i, j + 1);
            if ((i + j) % 2 == 0) {
                mesh->triangles_.push_back({a, b, c});
                mesh->triangles_.push_back({a, c, d});
            } else {
                mesh->triangles_.push_back({a, b, d});
                mesh->triangles_.push_back({b, c, d});
            }
        }
    }

    mesh->areas_.reserve(mesh->triangles_.size());
    mesh->centroids_.reserve(mesh->triangles_.size());
    mesh->grads_.reserve(mesh->triangles_.size());
    double total = 0.0;
    for (const auto &tri : mesh->triangles_) {
        const Vec2 p0 = mesh->vertices_[tri[0]];
        const Vec2 p1 = mesh->vertices_[tri[1]];
        const Vec2 p2 = mesh->vertices_[tri[2]];
        const double twice_area = cross(p1 - p0, p2 - p0);
        if (!(twice_area > 0.0))
            throw Error("degenerate or misoriented triangle in mesh construction");
        const double area = 0.5 * twice_area;
        mesh->areas_.push_back(area);
        mesh->centroids_.push_back(
            {(p0.x + p1.x + p2.x) / 3.0, (p0.y + p1.y + p2.y) / 3.0});
        mesh->grads_.push_back({Vec2{(p1.y - p2.y) / twice_area, (p2.x - p1.x) / twice_area},
                                Vec2{(p2.y - p0.y) / twice_area, (p0.x - p2.x) / twice_area},
                                Vec2{(p0.y - p1.y) / twice_area, (p1.x - p0.x) / twice_area}});
        total += area;
    }
    mesh->total_area_ = total;

    const double exact = width * height;
    if (std::abs(total - exact) > 1e-12 * exact)
        throw Error("triangle areas do not sum to the rectangle area");

    return mesh;
}

DiscreteField::DiscreteField(MeshPtr mesh, double fill)
    : mesh_(std::move(mesh)), values_(mesh_->vertex_count(), fill) {}

DiscreteField::DiscreteField(MeshPtr mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (values_.size() != mesh_->vertex_count())
        throw MeshMismatch("field has " + std::to_string(values_.size()) +
                           " values but the mesh has " +
                           std::to_string(mesh_->vertex_count()) + " vertices");
}

void DiscreteField::zero_boundary() {
    for (std::size_t v = 0; v < values_.size(); ++v)
        if (mesh_->is_boundary(v)) values_[v] = 0.0;
}

bool DiscreteField::trace_zero(double tol) const {
    for (std::size_t v = 0; v < values_.size(); ++v)
        if (mesh_->is_boundary(v) && std::abs(values_[v]) > tol) return false;
    return true;
}

double DiscreteField::mean_on(std::size_t k) const {
    const auto &tri = mesh_->triangle(k);
    return (values_[tri[0]] + values_[tri[1]] + values_[tri[2]]) / 3.0;
}

Vec2 DiscreteField::gradient_on(std::size_t k) const {
    const auto &tri = mesh_->triangle(k);
    Vec2 g{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        const Vec2 gl = mesh_->hat_gradient(k, i);
        const double v = values_[tri[static_cast<std::size_t>(i)]];
        g.x += v * gl.x;
        g.y += v * gl.y;
    }
    return g;
}

void require_same_mesh(const DiscreteField &a, const DiscreteField &b) {
    if (a.mesh_ptr() != b.mesh_ptr())
        throw MeshMismatch("fields live on different meshes");
}

std::vector<double> gradient_norms(const DiscreteField &u) {
    const Mesh &mesh = u.mesh();
    std::vector<double> norms(mesh.triangle_count());
    for (std::size_t k = 0; k < norms.size(); ++k) {
        const Vec2 g = u.gradient_on(k);
        norms[k] = std::hypot(g.x, g.y);
    }
    return norms;
}

double integrate_nodal(const DiscreteField &u,
                       const std::function<double(Vec2, double)> &g) {
    const Mesh &mesh = u.mesh();
    double acc = 0.0;
    for (std::size_t k = 0; k < mesh.triangle_count(); ++k)
        acc += mesh.area(k) * g(mesh.centroid(k), u.mean_on(k));
    return acc;
}

void write_field_csv(const DiscreteField &u, const std::string &path) {
    FileHandle f = open_for_write(path);
    std::fprintf(f.get(), "x,y,u\n");
    const Mesh &mesh = u.mesh();
    for (std::size_t v = 0; v < u.size(); ++v) {
        const Vec2 p = mesh.vertex(v);
        std::fprintf(f.get(), "%.17g,%.17g,%.17g\n", p.x, p.y, u[v]);
    }
}

void write_mesh_csv(const Mesh &mesh, const std::string &vertex_path,
                    const std::string &triangle_path) {
    {
        FileHandle f = open_for_write(vertex_path);
        std::fprintf(f.get(), "x,y\n");
        for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
            const Vec2 p = mesh.vertex(v);
            std::fprintf(f.get(), "%.17g,%.17g\n", p.x, p.y);
        }
    }
    {
        FileHandle f = open_for_write(triangle_path);
        std::fprintf(f.get(), "v0,v1,v2\n");
        for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
            const auto &tri = mesh.triangle(k);
            std::fprintf(f.get(), "%zu,%zu,%zu\n", tri[0], tri[1], tri[2]);
        }
    }
}

} // namespace phifem
