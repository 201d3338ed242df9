from arw_fixation.cli.dispatcher import main

main()
