package com.minipet.owners;

public class OwnerController {
    private OwnerService ownerService;

    public String showOwner(String lastName) {
        Owner owner = ownerService.findOwner(lastName);
        return owner.getFirstName() + " " + owner.getLastName();
    }

    public String registerOwner(String firstName, String lastName) {
        Owner owner = ownerService.register(firstName, lastName);
        return "owners/" + owner.getLastName();
    }
}
