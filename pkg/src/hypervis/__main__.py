from hypervis.cli import main

main()
