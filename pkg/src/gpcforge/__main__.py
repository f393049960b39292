from .toolfront import main

main()
