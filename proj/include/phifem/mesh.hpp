#pragma once

#include "phifem/errors.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace phifem {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// Conforming triangulation of an axis-aligned rectangle.  Each grid cell is
// split into two triangles along a diagonal whose direction alternates in a
// checkerboard pattern, so the mesh has no preferred direction overall.
// Immutable after construction; fields reference it through shared_ptr.
class Mesh {
public:
    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t triangle_count() const { return triangles_.size(); }

    Vec2 vertex(std::size_t v) const { return vertices_[v]; }
    const std::array<std::size_t, 3> &triangle(std::size_t k) const {
        return triangles_[k];
    }
    bool is_boundary(std::size_t v) const { return boundary_[v] != 0; }
    std::size_t boundary_count() const { return n_boundary_; }

    double area(std::size_t k) const { return areas_[k]; }
    Vec2 centroid(std::size_t k) const { return centroids_[k]; }
    // Gradient of the P1 hat function of local vertex i on triangle k;
    // the element gradient of a field is the sum of nodal values times these.
    Vec2 hat_gradient(std::size_t k, int i) const { return grads_[k][i]; }

    double total_area() const { return total_area_; }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double width() const { return width_; }
    double height() const { return height_; }

private:
    friend std::shared_ptr<const Mesh> make_rect_mesh(int, int, double, double);
    std::vector<Vec2> vertices_;
    std::vector<std::array<std::size_t, 3>> triangles_;
    std::vector<char> boundary_;
    std::vector<double> areas_;
    std::vector<Vec2> centroids_;
    std::vector<std::array<Vec2, 3>> grads_;
    double total_area_ = 0.0;
    std::size_t n_boundary_ = 0;
    int nx_ = 0, ny_ = 0;
    double width_ = 0.0, height_ = 0.0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

// Structured mesh of [0, width] x [0, height] with nx * ny cells and
// 2 * nx * ny triangles.  Throws InvalidDimensions unless nx, ny >= 2 and
// both edge lengths are positive.
MeshPtr make_rect_mesh(int nx, int ny, double width, double height);

// Piecewise-linear nodal field on a mesh.
class DiscreteField {
public:
    explicit DiscreteField(MeshPtr mesh, double fill = 0.0);
    DiscreteField(MeshPtr mesh, std::vector<double> values);

    double &operator[](std::size_t v) { return values_[v]; }
    double operator[](std::size_t v) const { return values_[v]; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    const Mesh &mesh() const { return *mesh_; }
    const MeshPtr &mesh_ptr() const { return mesh_; }

    void zero_boundary();
    // True when every boundary vertex carries a value of modulus <= tol.
    bool trace_zero(double tol = 0.0) const;

    // One-point barycentric data on triangle k.
    double mean_on(std::size_t k) const;
    Vec2 gradient_on(std::size_t k) const;

private:
    MeshPtr mesh_;
    std::vector<double> values_;
};

// Throws MeshMismatch when the two fields live on different meshes.
void require_same_mesh(const DiscreteField &a, const DiscreteField &b);

// Per-triangle Euclidean norms of the element gradients.
std::vector<double> gradient_norms(const DiscreteField &u);

// One-point barycentric quadrature of g(x, u(x)) over the mesh; exact for
// integrands that are affine on each triangle.
double integrate_nodal(const DiscreteField &u,
                       const std::function<double(Vec2, double)> &g);

// CSV writers.  Field rows are "x,y,u" in vertex order; the mesh is dumped
// as a vertex table "x,y" plus a triangle table "v0,v1,v2".
void write_field_csv(const DiscreteField &u, const std::string &path);
void write_mesh_csv(const Mesh &mesh, const std::string &vertex_path,
                    const std::string &triangle_path);

} // namespace phifem
