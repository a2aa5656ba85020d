// placeholder; full command-line interface added after the library settles
int main() { return 0; }
