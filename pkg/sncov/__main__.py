from sncov.cli import main

main()
