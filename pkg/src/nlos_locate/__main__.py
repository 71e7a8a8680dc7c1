from nlos_locate.cli import main

main()
