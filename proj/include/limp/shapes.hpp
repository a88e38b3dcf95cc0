#pragma once
// Procedural meshes used by tests, benchmarks, and the synthetic dataset:
// flat grids, icospheres, squares, tubes.

#include "limp/mesh.hpp"

namespace limp {

// k x k vertex rhombic patch of the equilateral triangular lattice spanning
// unit width: V[j*k+i] = ((i - j/2)*h, j*h*sqrt(3)/2, 0) with h = 1/(k-1).
// All triangles are equilateral and all four boundary edges are straight
// lattice lines, so the patch is convex and in-surface geodesics equal
// straight-line Euclidean distances. Vertex 0 sits at an obtuse (120 degree)
// corner.
TriMesh make_grid(int k);

// Unit icosphere: subdivided icosahedron projected to the unit sphere.
// subdivisions = 0,1,2,3 gives n = 12, 42, 162, 642.
TriMesh make_icosphere(int subdivisions);

// Unit square (4 vertices, 2 triangles).
TriMesh make_unit_square();

// Single equilateral triangle with given edge length, in the z=0 plane.
TriMesh make_equilateral_triangle(double edge_length);

// Open-ended cylinder along +z: rings of n_ring vertices at n_rows axial
// stations, vertex index = row*n_ring + k.
TriMesh make_tube(int n_ring, int n_rows, double radius, double length);

}  // namespace limp
