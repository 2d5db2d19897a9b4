#include <cstdio>
int main() { std::puts("ietlab cli placeholder"); }
